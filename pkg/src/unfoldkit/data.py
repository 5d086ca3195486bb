"""Core dataset container shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """A point cloud with optional labels and optional per-step actions.

    Points are stored as columns: ``points`` has shape (d, n).  Labels, when
    present, give one class identifier per point.  Actions, when present,
    give one identifier per consecutive pair: action i maps point i to
    point i + 1, so there are n - 1 of them.
    """

    points: np.ndarray
    labels: tuple | None = None
    actions: tuple | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array of column vectors")
        if pts.shape[1] < 2:
            raise ValueError("need at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != pts.shape[1]:
                raise ValueError("labels must have one entry per point")
            object.__setattr__(self, "labels", labels)
        if self.actions is not None:
            actions = tuple(self.actions)
            if len(actions) != pts.shape[1] - 1:
                raise ValueError("actions must have n - 1 entries")
            object.__setattr__(self, "actions", actions)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def dim(self) -> int:
        return self.points.shape[0]

    def classes(self) -> dict:
        """Map each class identifier to the indices of its points."""
        if self.labels is None:
            raise ValueError("dataset has no labels")
        groups: dict = {}
        for i, lab in enumerate(self.labels):
            groups.setdefault(lab, []).append(i)
        return groups

    def gram(self) -> np.ndarray:
        """Inner-product matrix of the points, X^T X."""
        return self.points.T @ self.points

    def squared_distances(self) -> np.ndarray:
        """Symmetric matrix of squared pairwise Euclidean distances."""
        g = self.gram()
        sq = np.diag(g)
        d2 = sq[:, None] + sq[None, :] - 2.0 * g
        np.fill_diagonal(d2, 0.0)
        return np.maximum(d2, 0.0)
