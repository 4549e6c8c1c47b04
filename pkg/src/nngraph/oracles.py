"""Noisy distance oracles.

Every unordered pair owns an independent random stream derived from the
oracle seed, so the sample sequence of a pair does not depend on the order in
which pairs are queried. Learners may ``peek`` ahead and ``take`` only what
they commit to; only taken samples count as oracle calls.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .metric import Dataset, SymmetricMatrix


class DistanceOracle:
    """Base class: subclasses implement ``_draw(rng, i, j, m)`` for i < j."""

    def __init__(self, n: int, seed: int = 0):
        if n < 2:
            raise DomainError(f"need n >= 2, got {n}")
        self.n = int(n)
        self.seed = int(seed)
        self.calls = SymmetricMatrix(self.n, fill=0, diagonal=0, dtype=np.int64)
        self._rngs: dict[int, np.random.Generator] = {}
        self._buf: dict[int, np.ndarray] = {}
        self._pos: dict[int, int] = {}

    def _draw(self, rng: np.random.Generator, i: int, j: int, m: int) -> np.ndarray:
        raise NotImplementedError

    def true_distance(self, i: int, j: int) -> float:
        raise NotImplementedError

    def _key(self, i: int, j: int) -> tuple[int, int, int]:
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise DomainError(f"invalid pair ({i}, {j})")
        a, b = (i, j) if i < j else (j, i)
        return a * self.n + b, a, b

    def _ensure(self, key: int, a: int, b: int, m: int) -> None:
        buf = self._buf.get(key)
        pos = self._pos.get(key, 0)
        have = 0 if buf is None else len(buf) - pos
        if buf is not None and have >= m:
            return
        rng = self._rngs.get(key)
        if rng is None:
            rng = np.random.default_rng([self.seed, a, b])
            self._rngs[key] = rng
        fresh = self._draw(rng, a, b, max(m - have, 16))
        rest = np.empty(0) if buf is None else buf[pos:]
        self._buf[key] = np.concatenate([rest, fresh])
        self._pos[key] = 0

    def peek(self, i: int, j: int, m: int) -> np.ndarray:
        """The next ``m`` samples of pair (i, j) without consuming them."""
        key, a, b = self._key(i, j)
        self._ensure(key, a, b, m)
        pos = self._pos[key]
        return self._buf[key][pos:pos + m]

    def take(self, i: int, j: int, m: int) -> np.ndarray:
        """Consume and return the next ``m`` samples of pair (i, j)."""
        out = self.peek(i, j, m).copy()
        key, a, b = self._key(i, j)
        self._pos[key] += m
        c = self.calls.raw()
        c[a, b] += m
        c[b, a] += m
        return out

    def query(self, i: int, j: int) -> float:
        return float(self.take(i, j, 1)[0])

    @property
    def total_calls(self) -> int:
        return int(np.triu(self.calls.values, 1).sum())


class GaussianOracle(DistanceOracle):
    """``d[i,j] + N(0, sigma^2)``."""

    def __init__(self, dataset: Dataset, sigma: float = 1.0, seed: int = 0):
        if sigma < 0:
            raise DomainError("sigma must be nonnegative")
        super().__init__(dataset.n, seed)
        self.dataset = dataset
        self.sigma = float(sigma)

    def true_distance(self, i: int, j: int) -> float:
        return float(self.dataset.d[i, j])

    def _draw(self, rng, i, j, m):
        z = rng.standard_normal(m)
        return self.dataset.d[i, j] + self.sigma * z


def _triple_softmax(d: np.ndarray, sharpness: float) -> np.ndarray:
    """P[i,j,k] = 1 - P({i,j} is judged the closest pair of {i,j,k})."""
    n = d.shape[0]
    dij = d[:, :, None]
    dik = d[:, None, :]
    djk = d[None, :, :]
    m = np.minimum(np.minimum(dij, dik), djk)
    eij = np.exp(-sharpness * (dij - m))
    eik = np.exp(-sharpness * (dik - m))
    ejk = np.exp(-sharpness * (djk - m))
    p = (eik + ejk) / (eij + eik + ejk)
    p = (p + p.transpose(1, 0, 2)) / 2.0
    idx = np.arange(n)
    p[idx, idx, :] = np.nan
    p[idx, :, idx] = np.nan
    p[:, idx, idx] = np.nan
    return p


def induced_distances(probs: np.ndarray) -> np.ndarray:
    """``d[i,j] = mean over k outside {i,j} of probs[i,j,k]``."""
    n = probs.shape[0]
    d = np.nansum(probs, axis=2) / (n - 2)
    np.fill_diagonal(d, 0.0)
    return (d + d.T) / 2.0


class TripletOracle(DistanceOracle):
    """Draw k uniformly from the other points, then a coin with ``probs[i,j,k]``.

    The sample is an unbiased estimate of ``induced_distances(probs)[i,j]``.
    """

    def __init__(self, probs: np.ndarray, seed: int = 0, geometry: Dataset | None = None):
        probs = np.asarray(probs, dtype=float)
        n = probs.shape[0]
        if probs.shape != (n, n, n) or n < 3:
            raise DomainError("triplet probabilities must be an n x n x n array with n >= 3")
        off = _distinct_mask(n)
        if np.any((probs[off] < 0) | (probs[off] > 1)):
            raise DomainError("triplet probabilities must lie in [0, 1]")
        if not np.allclose(np.nan_to_num(probs), np.nan_to_num(probs.transpose(1, 0, 2))):
            raise DomainError("triplet probabilities must be symmetric in (i, j)")
        super().__init__(n, seed)
        self.probs = probs
        self.geometry = geometry
        d = induced_distances(probs)
        self.dataset = Dataset.from_array(d, metric=False,
                                          labels=None if geometry is None else geometry.labels,
                                          generator={"name": "triplet", "source": None if geometry is None else geometry.generator})

    def true_distance(self, i: int, j: int) -> float:
        return float(self.dataset.d[i, j])

    def _draw(self, rng, i, j, m):
        u = rng.random((m, 2))
        others = np.array([k for k in range(self.n) if k != i and k != j])
        ks = others[np.minimum((u[:, 0] * len(others)).astype(np.int64), len(others) - 1)]
        return (u[:, 1] < self.probs[i, j, ks]).astype(float)

    def to_table(self) -> dict:
        i, j, k = np.nonzero(_distinct_mask(self.n) & (np.arange(self.n)[:, None, None] < np.arange(self.n)[None, :, None]))
        return {
            "n": self.n,
            "probs": [{"i": int(a), "j": int(b), "k": int(c), "p": float(self.probs[a, b, c])}
                      for a, b, c in zip(i, j, k)],
        }

    def save_table(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_table()))


def _distinct_mask(n: int) -> np.ndarray:
    idx = np.arange(n)
    return (idx[:, None, None] != idx[None, :, None]) & (idx[:, None, None] != idx[None, None, :]) & (
        idx[None, :, None] != idx[None, None, :])


def synth_triplet_probs(dataset: Dataset, sharpness: float, seed: int = 0) -> TripletOracle:
    """Triplet oracle whose coin is a softmax link over the three pairwise distances."""
    if not sharpness > 0:
        raise DomainError("sharpness must be positive")
    return TripletOracle(_triple_softmax(np.asarray(dataset.d, dtype=float), sharpness), seed=seed, geometry=dataset)


def load_triplet_table(doc: dict, fallback: Dataset | None = None, sharpness: float = 1.0,
                       seed: int = 0) -> TripletOracle:
    """Build a triplet oracle from ``{"n", "probs": [{i, j, k, p}]}``.

    Entries may list either order of (i, j); missing triples take the
    synthetic link over ``fallback`` and are an error without one.
    """
    n = int(doc["n"])
    probs = np.full((n, n, n), np.nan)
    for rec in doc["probs"]:
        i, j, k, p = int(rec["i"]), int(rec["j"]), int(rec["k"]), float(rec["p"])
        if len({i, j, k}) < 3:
            raise DomainError(f"triple ({i}, {j}, {k}) is not distinct")
        probs[i, j, k] = p
        probs[j, i, k] = p
    missing = _distinct_mask(n) & np.isnan(probs)
    if missing.any():
        if fallback is None:
            raise DomainError(f"{int(missing.sum())} triplet entries missing and no fallback geometry")
        if fallback.n != n:
            raise DomainError("fallback geometry size does not match the table")
        synth = _triple_softmax(np.asarray(fallback.d, dtype=float), sharpness)
        probs[missing] = synth[missing]
    return TripletOracle(probs, seed=seed, geometry=fallback)
