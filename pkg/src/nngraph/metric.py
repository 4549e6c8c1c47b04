"""Symmetric storage, ground-truth datasets and gap/complexity quantities."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DomainError, TieError


class SymmetricMatrix:
    """Dense n x n float store whose writes always hit (i, j) and (j, i).

    ``fill`` is the off-diagonal initial value and ``diagonal`` the fixed
    diagonal value (0 for distances and counts, +inf for upper bounds, -inf
    for lower bounds).
    """

    __slots__ = ("n", "_a", "diagonal")

    def __init__(self, n: int, fill: float = 0.0, diagonal: float = 0.0, dtype=float):
        if n < 1:
            raise DomainError(f"matrix size must be positive, got {n}")
        self.n = int(n)
        self.diagonal = diagonal
        self._a = np.full((self.n, self.n), fill, dtype=dtype)
        np.fill_diagonal(self._a, diagonal)

    @classmethod
    def from_array(cls, array, diagonal: float | None = None) -> "SymmetricMatrix":
        a = np.asarray(array)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise DomainError("matrix is not symmetric")
        diag = a[0, 0] if diagonal is None else diagonal
        m = cls(a.shape[0], diagonal=diag, dtype=a.dtype)
        m._a[...] = a
        np.fill_diagonal(m._a, diag)
        return m

    @property
    def values(self) -> np.ndarray:
        """Read-only view of the underlying array."""
        v = self._a.view()
        v.flags.writeable = False
        return v

    def raw(self) -> np.ndarray:
        """Mutable backing array. Callers must keep it symmetric."""
        return self._a

    def __getitem__(self, idx):
        return self._a[idx]

    def __setitem__(self, ij, value) -> None:
        i, j = ij
        self.set(i, j, value)

    def set(self, i, j, value) -> None:
        """Write ``value`` at (i, j) and (j, i); accepts index arrays."""
        self._a[i, j] = value
        self._a[j, i] = value

    def copy(self) -> "SymmetricMatrix":
        m = SymmetricMatrix.__new__(SymmetricMatrix)
        m.n = self.n
        m.diagonal = self.diagonal
        m._a = self._a.copy()
        return m

    def lower_triangle(self) -> list:
        """Strict lower triangle, row by row: (1,0), (2,0), (2,1), ..."""
        rows, cols = np.tril_indices(self.n, -1)
        return self._a[rows, cols].tolist()

    @classmethod
    def from_lower_triangle(cls, n: int, entries, diagonal: float = 0.0, dtype=float) -> "SymmetricMatrix":
        entries = np.asarray(entries, dtype=dtype)
        expected = n * (n - 1) // 2
        if entries.shape != (expected,):
            raise DomainError(f"expected {expected} lower-triangle entries for n={n}, got {entries.shape}")
        m = cls(n, diagonal=diagonal, dtype=dtype)
        rows, cols = np.tril_indices(n, -1)
        m.set(rows, cols, entries)
        return m

    def __repr__(self) -> str:
        return f"SymmetricMatrix(n={self.n})"


def _check_distances(d: np.ndarray) -> None:
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DomainError(f"distance matrix must be square, got {d.shape}")
    if not np.all(np.isfinite(d)):
        raise DomainError("distances must be finite")
    if np.any(np.diag(d) != 0):
        raise DomainError("distance matrix must have a zero diagonal")
    if np.any(d < 0):
        raise DomainError("distances must be nonnegative")
    if not np.array_equal(d, d.T):
        raise DomainError("distance matrix must be symmetric")


def triangle_violation(d: np.ndarray) -> float:
    """Largest ``d[i,j] - d[i,k] - d[k,j]`` over all triples (<= 0 for a metric)."""
    d = np.asarray(d, dtype=float)
    worst = -np.inf
    for k in range(d.shape[0]):
        gap = d - (d[:, k][:, None] + d[k, :][None, :])
        worst = max(worst, float(gap.max()))
    return worst


def is_metric(d: np.ndarray, rtol: float = 1e-9) -> bool:
    """Triangle inequality check with a relative tolerance for rounding."""
    d = np.asarray(d, dtype=float)
    scale = float(d.max()) if d.size else 0.0
    return triangle_violation(d) <= rtol * max(scale, 1.0)


@dataclass
class Dataset:
    """Ground-truth distances plus provenance; used only for evaluation.

    ``coords`` holds embedding coordinates when the generator has them
    (needed by the triangulation baseline and for external plotting).
    """

    distances: SymmetricMatrix
    labels: np.ndarray | None = None
    generator: dict[str, Any] = field(default_factory=dict)
    coords: np.ndarray | None = None
    metric: bool = True

    def __post_init__(self):
        if not isinstance(self.distances, SymmetricMatrix):
            self.distances = SymmetricMatrix.from_array(np.asarray(self.distances, dtype=float), diagonal=0.0)
        _check_distances(self.distances.values)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (self.n,):
                raise DomainError("labels must have one entry per point")
        if self.coords is not None:
            self.coords = np.asarray(self.coords, dtype=float)
            if self.coords.ndim == 1:
                self.coords = self.coords[:, None]
            if self.coords.shape[0] != self.n:
                raise DomainError("coords must have one row per point")
        if self.metric and not is_metric(self.distances.values):
            raise DomainError(
                f"distances violate the triangle inequality by {triangle_violation(self.distances.values):.3g}"
            )

    @classmethod
    def from_array(cls, d, **kw) -> "Dataset":
        return cls(SymmetricMatrix.from_array(np.asarray(d, dtype=float), diagonal=0.0), **kw)

    @property
    def n(self) -> int:
        return self.distances.n

    @property
    def d(self) -> np.ndarray:
        return self.distances.values

    def to_json(self) -> dict:
        doc = {
            "n": self.n,
            "distances": self.distances.lower_triangle(),
            "labels": None if self.labels is None else self.labels.tolist(),
            "generator": self.generator,
        }
        if self.coords is not None:
            doc["coords"] = self.coords.tolist()
        if not self.metric:
            doc["metric"] = False
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Dataset":
        n = int(doc["n"])
        dist = SymmetricMatrix.from_lower_triangle(n, doc["distances"], diagonal=0.0)
        return cls(
            dist,
            labels=doc.get("labels"),
            generator=doc.get("generator") or {},
            coords=doc.get("coords"),
            metric=doc.get("metric", True),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "Dataset":
        return cls.from_json(json.loads(Path(path).read_text()))


def nn_sets(dataset: Dataset) -> list[set[int]]:
    """All exact row minimizers per point; used when scoring with ties allowed."""
    d = np.array(dataset.d, dtype=float)
    np.fill_diagonal(d, np.inf)
    mins = d.min(axis=1)
    return [set(np.flatnonzero(d[i] == mins[i]).tolist()) for i in range(dataset.n)]


def true_nn_graph(dataset: Dataset) -> np.ndarray:
    """Nearest neighbor of every point; raises TieError on an exact tie."""
    if dataset.n < 2:
        raise DomainError("need at least two points")
    out = np.empty(dataset.n, dtype=int)
    for i, s in enumerate(nn_sets(dataset)):
        if len(s) > 1:
            raise TieError(i, s)
        out[i] = next(iter(s))
    return out


@dataclass(frozen=True)
class GapProfile:
    """Suboptimality gaps; ``gaps[j, k]`` is the gap of k for point j.

    The diagonal is nan. ``gaps[j, nn[j]]`` is the smallest gap among the
    other candidates of j (for two points it falls back to the distance).
    """

    nn: np.ndarray
    gaps: np.ndarray

    def row(self, j: int) -> np.ndarray:
        return np.delete(self.gaps[j], j)

    @property
    def min_gap(self) -> float:
        return float(np.nanmin(self.gaps))


def gap_profile(dataset: Dataset) -> GapProfile:
    nn = true_nn_graph(dataset)
    d = dataset.d
    n = dataset.n
    gaps = d - d[np.arange(n), nn][:, None]
    gaps = gaps.astype(float)
    np.fill_diagonal(gaps, np.nan)
    for j in range(n):
        others = [k for k in range(n) if k != j and k != nn[j]]
        gaps[j, nn[j]] = gaps[j, others].min() if others else d[j, nn[j]]
    return GapProfile(nn=nn, gaps=gaps)


def complexity_term(n: int, delta: float, gap: float) -> float:
    """Per-pair sample complexity ``log(n^2 / (delta * gap)) / gap^2``."""
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not gap > 0:
        raise DomainError(f"gap must be positive, got {gap}")
    return math.log(n * n / (delta * gap)) / (gap * gap)


def quasi_metric_constant(dataset: Dataset) -> float:
    """Smallest c with d[i,j] <= c (d[i,k] + d[j,k]) over distinct triples."""
    n = dataset.n
    if n < 3:
        raise DomainError("need at least three points")
    d = dataset.d
    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] <= 0):
        raise DomainError("off-diagonal distances must be positive")
    best = 0.0
    for k in range(n):
        denom = d[:, k][:, None] + d[k, :][None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = d / denom
        mask = off.copy()
        mask[k, :] = False
        mask[:, k] = False
        if mask.any():
            best = max(best, float(ratio[mask].max()))
    return best

