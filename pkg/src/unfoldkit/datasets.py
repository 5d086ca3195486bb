"""Synthetic manifold generators used by the tests, demos, and CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

MANIFOLD_NAMES = ("swiss-roll-3d", "spiral-2d", "trefoil-3d", "s-curve-3d", "hinge-chain")


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    n: int
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.name not in MANIFOLD_NAMES:
            raise ValueError(f"unknown manifold {self.name!r}; choose from {MANIFOLD_NAMES}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")


@dataclass(frozen=True)
class GeneratedData:
    """Points plus the intrinsic chart parameters that generated them."""

    dataset: Dataset
    params: np.ndarray  # (n_params, n); arc length for curves, (u, v) for surfaces


def _arclength_spaced(curve, t_lo, t_hi, n, samples=20000):
    """Parameter values giving n points equally spaced in arc length.

    Numeric inversion of the cumulative arc length of ``curve`` on a dense
    parameter grid.
    """
    ts = np.linspace(t_lo, t_hi, samples)
    pts = curve(ts)
    seg = np.linalg.norm(np.diff(pts, axis=1), axis=0)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], n)
    return np.interp(targets, cum, ts), targets


def _spiral(ts):
    # Archimedean spiral r = t
    return np.vstack([ts * np.cos(ts), ts * np.sin(ts)])


def _trefoil(ts):
    return np.vstack([
        np.sin(ts) + 2.0 * np.sin(2.0 * ts),
        np.cos(ts) - 2.0 * np.cos(2.0 * ts),
        -np.sin(3.0 * ts),
    ])


def generate(spec: ManifoldSpec) -> GeneratedData:
    """Generate a manifold sample, deterministic for a given seed."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n

    if spec.name == "spiral-2d":
        ts, arc = _arclength_spaced(_spiral, 0.5 * np.pi, 3.0 * np.pi, n)
        pts = _spiral(ts)
        params = arc[None, :]
    elif spec.name == "trefoil-3d":
        ts, arc = _arclength_spaced(_trefoil, 0.0, 2.0 * np.pi, n)
        pts = _trefoil(ts)
        params = arc[None, :]
    elif spec.name == "swiss-roll-3d":
        t = rng.uniform(1.5 * np.pi, 4.5 * np.pi, size=n)
        t.sort()
        h = rng.uniform(0.0, 10.0, size=n)
        pts = np.vstack([t * np.cos(t), h, t * np.sin(t)])
        params = np.vstack([t, h])
    elif spec.name == "s-curve-3d":
        t = rng.uniform(-1.5 * np.pi, 1.5 * np.pi, size=n)
        t.sort()
        h = rng.uniform(0.0, 2.0, size=n)
        pts = np.vstack([np.sin(t), h, np.sign(t) * (np.cos(t) - 1.0)])
        params = np.vstack([t, h])
    elif spec.name == "hinge-chain":
        # Staircase of unit steps: right, up, right, up, ...
        # n = 3 gives exactly (0,0), (1,0), (1,1).
        pts = np.zeros((2, n))
        pos = np.zeros(2)
        for i in range(1, n):
            pos = pos + (np.array([1.0, 0.0]) if i % 2 == 1 else np.array([0.0, 1.0]))
            pts[:, i] = pos
        params = np.arange(n, dtype=float)[None, :]
    else:  # pragma: no cover - guarded by ManifoldSpec
        raise ValueError(spec.name)

    if spec.noise > 0:
        pts = pts + rng.normal(0.0, spec.noise, size=pts.shape)
    return GeneratedData(dataset=Dataset(points=pts), params=params)
