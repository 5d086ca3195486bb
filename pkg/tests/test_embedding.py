"""Kernel-PCA embedding, Nystrom eigenfunctions, dimension estimate, and
the synthetic manifold generators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfoldkit.data import Dataset
from unfoldkit.datasets import MANIFOLD_NAMES, ManifoldSpec, generate
from unfoldkit.embedding import (EigenfunctionModel, Embedding,
                                 embed_from_kernel, embed_out_of_sample,
                                 eval_eigenfunction, fit_eigenfunction_model,
                                 intrinsic_dimension)
from unfoldkit.graph import build_knn_graph, geodesic_distances
from unfoldkit.kernels import KernelMatrix, center_kernel


def linear_kernel_fn(X, x):
    return X.T @ np.asarray(x, dtype=float)


class TestEmbedFromKernel:
    def test_two_point_kernel(self):
        K = KernelMatrix(values=np.array([[1.0, -1.0], [-1.0, 1.0]]))
        emb = embed_from_kernel(K, 1)
        assert emb.eigenvalues[0] == pytest.approx(2.0)
        np.testing.assert_allclose(np.abs(emb.coordinates), [[1.0, 1.0]],
                                   atol=1e-12)
        assert emb.coordinates[0, 0] * emb.coordinates[0, 1] < 0

    def test_zero_kernel(self):
        K = KernelMatrix(values=np.zeros((3, 3)))
        emb = embed_from_kernel(K, 2)
        np.testing.assert_allclose(emb.coordinates, 0.0)

    def test_centered_gram_reproduces_points(self):
        data = Dataset(points=np.array([[0.0, 2.0]]))
        K = center_kernel(KernelMatrix(values=data.gram()))
        emb = embed_from_kernel(K, 1)
        np.testing.assert_allclose(np.abs(emb.coordinates), [[1.0, 1.0]],
                                   atol=1e-12)

    def test_p_out_of_range(self):
        K = KernelMatrix(values=np.eye(2))
        with pytest.raises(ValueError):
            embed_from_kernel(K, 3)

    def test_negative_eigenvalues_clamped(self):
        K = KernelMatrix(values=np.diag([2.0, -1.0]))
        emb = embed_from_kernel(K, 2)
        assert emb.clamped == 1
        np.testing.assert_allclose(emb.coordinates[1], 0.0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=2, max_value=12))
    def test_gram_reconstruction_at_full_rank(self, seed, n):
        rng = np.random.default_rng(seed)
        B = rng.normal(size=(n, n))
        K = KernelMatrix(values=B @ B.T)
        emb = embed_from_kernel(K, n)
        Y = emb.coordinates
        assert np.linalg.norm(Y.T @ Y - K.values) <= 1e-6 * np.linalg.norm(K.values)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=2, max_value=12))
    def test_variance_identity(self, seed, n):
        # mean pairwise spread of the full embedding equals the trace
        rng = np.random.default_rng(seed)
        B = rng.normal(size=(n, n))
        H = np.eye(n) - 1.0 / n
        K = KernelMatrix(values=H @ B @ B.T @ H, centered=True)
        emb = embed_from_kernel(K, n)
        spread = emb.pairwise_sq_distances().sum() / (2.0 * n)
        assert spread == pytest.approx(np.trace(K.values), rel=1e-6)


class TestEigenfunctions:
    def fitted(self, pts):
        return fit_eigenfunction_model(Dataset(points=pts), linear_kernel_fn)

    def test_training_point_identity(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(2, 6))
        model = self.fitted(pts)
        n = 6
        for i in range(n):
            want = np.sqrt(n) * model.eigenvectors[i, 0]
            got = eval_eigenfunction(model, 0, pts[:, i])
            assert got == pytest.approx(want, rel=1e-6, abs=1e-9)

    def test_rank_deficient_eigenvalue_rejected(self):
        pts = np.array([[0.0, 1.0, 2.0]])
        model = self.fitted(pts)
        with pytest.raises(ValueError, match="not positive"):
            eval_eigenfunction(model, 2, pts[:, 0])

    def test_midpoint_antisymmetry(self):
        # symmetric pair: the centered kernel column at the midpoint is zero
        pts = np.array([[-1.0, 1.0]])
        model = self.fitted(pts)
        assert eval_eigenfunction(model, 0, np.array([0.0])) == \
            pytest.approx(0.0, abs=1e-9)

    def test_out_of_sample_matches_training_embedding(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(3, 8))
        data = Dataset(points=pts)
        model = fit_eigenfunction_model(data, linear_kernel_fn)
        K = center_kernel(KernelMatrix(values=data.gram()))
        emb = embed_from_kernel(K, 3)
        for i in range(8):
            y = embed_out_of_sample(model, pts[:, i], 3)
            np.testing.assert_allclose(y, emb.coordinates[:, i],
                                       rtol=1e-6, atol=1e-8)

    def test_out_of_sample_zero_column(self):
        pts = np.array([[-1.0, 1.0]])
        model = self.fitted(pts)
        y = embed_out_of_sample(model, np.array([0.0]), 1)
        np.testing.assert_allclose(y, 0.0, atol=1e-9)

    def test_collinear_interpolation(self):
        pts = np.array([[0.0, 1.0, 2.0]])
        model = self.fitted(pts)
        y0 = embed_out_of_sample(model, np.array([0.0]), 1)
        y2 = embed_out_of_sample(model, np.array([2.0]), 1)
        ymid = embed_out_of_sample(model, np.array([1.0]), 1)
        np.testing.assert_allclose(ymid, 0.5 * (y0 + y2), atol=1e-9)

    def test_p_beyond_positive_rank(self):
        pts = np.array([[0.0, 1.0, 2.0]])
        model = self.fitted(pts)
        with pytest.raises(ValueError):
            embed_out_of_sample(model, np.array([0.5]), 3)


class TestIntrinsicDimension:
    def test_internal_gap(self):
        assert intrinsic_dimension([10.0, 9.0, 0.01], gap_ratio=10) == 2

    def test_trailing_zeros(self):
        assert intrinsic_dimension([5.0, 0.0, 0.0]) == 1

    def test_single_value(self):
        assert intrinsic_dimension([1.0]) == 1

    def test_no_positive(self):
        with pytest.raises(ValueError):
            intrinsic_dimension([0.0, -1.0])

    def test_bad_ratio(self):
        with pytest.raises(ValueError):
            intrinsic_dimension([1.0], gap_ratio=1.0)


class TestGenerators:
    def test_spiral_equal_arc_segments(self):
        # points are equally spaced in arc length (chords on a curved
        # spiral are necessarily unequal); measure the arc between
        # consecutive samples by dense polyline integration
        gen = generate(ManifoldSpec(name="spiral-2d", n=3, seed=0))
        arc = gen.params[0]
        segs = np.diff(arc)
        assert segs[0] == pytest.approx(segs[1], rel=1e-6)
        ts = np.linspace(0.5 * np.pi, 3.0 * np.pi, 200_000)
        dense = np.vstack([ts * np.cos(ts), ts * np.sin(ts)])
        cum = np.concatenate([[0.0], np.cumsum(
            np.linalg.norm(np.diff(dense, axis=1), axis=0))])
        measured = []
        for j in range(gen.dataset.n):
            i = np.argmin(np.linalg.norm(dense - gen.dataset.points[:, [j]],
                                         axis=0))
            measured.append(cum[i])
        measured_segs = np.diff(measured)
        assert measured_segs[0] == pytest.approx(measured_segs[1], rel=1e-3)

    def test_deterministic(self):
        for name in MANIFOLD_NAMES:
            a = generate(ManifoldSpec(name=name, n=10, seed=3)).dataset
            b = generate(ManifoldSpec(name=name, n=10, seed=3)).dataset
            np.testing.assert_array_equal(a.points, b.points)

    def test_hinge_chain_fixture(self):
        data = generate(ManifoldSpec(name="hinge-chain", n=3, seed=0)).dataset
        np.testing.assert_allclose(data.points,
                                   [[0.0, 1.0, 1.0], [0.0, 0.0, 1.0]],
                                   atol=1e-12)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown manifold"):
            ManifoldSpec(name="torus", n=10, seed=0)

    def test_curve_geodesic_approximates_arc_length(self):
        gen = generate(ManifoldSpec(name="spiral-2d", n=100, seed=0))
        data = gen.dataset
        g = build_knn_graph(data, 2)
        D = geodesic_distances(g)
        arc = gen.params[0]
        true_span = abs(arc[-1] - arc[0])
        graph_span = np.sqrt(D.values[0, data.n - 1])
        assert abs(graph_span - true_span) <= 0.05 * true_span
