"""Manifold unfolding toolkit: spectral kernels, maximum variance
unfolding by interior-point SDP, supervised and landmark variants, and
out-of-sample extensions."""

__version__ = "0.1.0"

from .data import Dataset
from .datasets import ManifoldSpec, generate
from .embedding import Embedding, embed_from_kernel, intrinsic_dimension
from .graph import (DisconnectedGraphError, NeighborGraph, build_knn_graph,
                    geodesic_distances)
from .kernels import KernelMatrix, build_catalog_kernel
from .mvu import MvuProblem, MvuResult, assemble_mvu, solve_mvu
from .sdp import SdpProblem, SdpSolution, SolverOptions, solve_sdp

__all__ = [
    "Dataset", "ManifoldSpec", "generate",
    "Embedding", "embed_from_kernel", "intrinsic_dimension",
    "DisconnectedGraphError", "NeighborGraph", "build_knn_graph",
    "geodesic_distances",
    "KernelMatrix", "build_catalog_kernel",
    "MvuProblem", "MvuResult", "assemble_mvu", "solve_mvu",
    "SdpProblem", "SdpSolution", "SolverOptions", "solve_sdp",
    "__version__",
]
