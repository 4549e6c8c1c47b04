"""Confidence radii, the shared bound matrices and triangle-inequality propagation."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .metric import SymmetricMatrix

INF = math.inf


def _as_counts(T) -> np.ndarray:
    t = np.asarray(T, dtype=float)
    if np.any(t < 1):
        raise DomainError("confidence radius needs at least one sample")
    return t


def hoeffding_radius(T, delta: float, n: int, sigma: float = 1.0):
    """Anytime Hoeffding + union bound radius ``sqrt(2 log(4 n^2 T^2 / delta) / T)``.

    ``delta`` is the overall failure budget; the per-round split is already
    inside the ``n^2`` factor. Vectorized over ``T``.
    """
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    t = _as_counts(T)
    r = sigma * np.sqrt(2.0 * np.log(4.0 * n * n * t * t / delta) / t)
    return float(r) if np.ndim(r) == 0 else r


def lil_radius(T, epsilon: float, delta: float, sigma: float = 1.0):
    """Finite-time iterated-logarithm radius.

    ``(1 + sqrt(eps)) * sqrt(2 (1 + eps) / T * log(log2(2T) (1 + eps) / delta))``
    """
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    t = _as_counts(T)
    inner = np.log(np.log2(2.0 * t) * (1.0 + epsilon) / delta)
    r = sigma * (1.0 + math.sqrt(epsilon)) * np.sqrt(2.0 * (1.0 + epsilon) / t * inner)
    return float(r) if np.ndim(r) == 0 else r


@dataclass(frozen=True)
class ConfidencePolicy:
    """Which radius the learners use.

    ``delta`` is the overall failure budget and ``n`` the item count. For the
    iterated-logarithm kind the per-round level ``delta / n`` is fed to the
    radius. ``sigma`` is the sub-Gaussian scale the radius assumes.
    """

    kind: str
    delta: float
    n: int
    epsilon: float = 0.7
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("hoeffding", "lil"):
            raise DomainError(f"unknown confidence policy {self.kind!r}")
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.n < 2:
            raise DomainError(f"need n >= 2, got {self.n}")
        if self.sigma <= 0:
            raise DomainError("sigma must be positive")

    @property
    def round_delta(self) -> float:
        return self.delta / self.n

    def radius(self, T):
        if self.kind == "hoeffding":
            return hoeffding_radius(T, self.delta, self.n, self.sigma)
        return lil_radius(T, self.epsilon, self.round_delta, self.sigma)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "ConfidencePolicy":
        return cls(**doc)

    def with_n(self, n: int) -> "ConfidencePolicy":
        return ConfidencePolicy(self.kind, self.delta, n, self.epsilon, self.sigma)


_ROLES = {
    "dhat": (0.0, 0.0),
    "T": (0.0, 0.0),
    "U": (INF, INF),
    "L": (-INF, -INF),
    "Utri": (INF, INF),
    "Ltri": (-INF, -INF),
}


class BoundState:
    """Empirical means, counts, concentration bounds and triangle bounds.

    All six matrices are symmetric. Running sums are kept alongside the means
    so that batched and one-at-a-time updates give bit-identical results.
    """

    def __init__(self, n: int, policy: ConfidencePolicy):
        self.n = int(n)
        self.policy = policy
        for name, (fill, diag) in _ROLES.items():
            setattr(self, name, SymmetricMatrix(self.n, fill=fill, diagonal=diag))
        self.T = SymmetricMatrix(self.n, fill=0, diagonal=0, dtype=np.int64)
        self._sum = np.zeros((self.n, self.n))

    # -- concentration bounds -------------------------------------------------

    def record_sample(self, i: int, j: int, value: float) -> None:
        if i == j:
            raise DomainError("cannot sample a point against itself")
        self.record_samples(j, np.array([i]), np.array([float(value)]))

    def record_samples(self, j: int, partners, values) -> None:
        """Apply samples of pairs (partners[t], j) in the given order."""
        partners = np.asarray(partners, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if partners.size == 0:
            return
        if np.any(partners == j):
            raise DomainError("cannot sample a point against itself")
        col = self._sum[:, j].copy()
        np.add.at(col, partners, values)
        counts = np.bincount(partners, minlength=self.n)
        touched = np.flatnonzero(counts)
        T = self.T.raw()
        newT = T[touched, j] + counts[touched]
        s = col[touched]
        self._sum[touched, j] = s
        self._sum[j, touched] = s
        self.T.set(touched, j, newT)
        mean = s / newT
        rad = self.policy.radius(newT)
        self.dhat.set(touched, j, mean)
        self.U.set(touched, j, mean + rad)
        self.L.set(touched, j, mean - rad)

    def sums(self) -> np.ndarray:
        return self._sum

    # -- effective bounds -----------------------------------------------------

    def upper(self) -> np.ndarray:
        """Tightest known upper bound per pair, ``min(U, Utri)``."""
        return np.minimum(self.U.values, self.Utri.values)

    def lower(self) -> np.ndarray:
        """Tightest known lower bound per pair, ``max(L, Ltri)``."""
        return np.maximum(self.L.values, self.Ltri.values)

    def total_queries(self) -> int:
        return int(np.triu(self.T.values, 1).sum())

    # -- snapshots ------------------------------------------------------------

    def snapshot(self) -> dict:
        def enc(m: SymmetricMatrix):
            return [None if not math.isfinite(v) else v for v in m.lower_triangle()]

        doc = {"n": self.n, "policy": self.policy.to_json()}
        for name in _ROLES:
            doc[name] = enc(getattr(self, name))
        doc["sum"] = SymmetricMatrix.from_array(self._sum, diagonal=0.0).lower_triangle()
        return doc

    @classmethod
    def from_snapshot(cls, doc: dict) -> "BoundState":
        st = cls(doc["n"], ConfidencePolicy.from_json(doc["policy"]))
        for name, (fill, diag) in _ROLES.items():
            vals = [fill if v is None else v for v in doc[name]]
            dtype = np.int64 if name == "T" else float
            setattr(st, name, SymmetricMatrix.from_lower_triangle(st.n, vals, diagonal=diag, dtype=dtype))
        if "sum" in doc:
            st._sum = SymmetricMatrix.from_lower_triangle(st.n, doc["sum"], diagonal=0.0).raw()
        else:
            st._sum = st.dhat.values * st.T.values
        return st

    def to_json_str(self) -> str:
        return json.dumps(self.snapshot())


# -- triangle bounds ----------------------------------------------------------


def _clamped_lower(lo_a, lo_b, up_a, up_b):
    """``(max(lo) - min(up))_+`` with -inf kept when no lower bound is finite."""
    hi = np.maximum(lo_a, lo_b)
    lo = np.minimum(up_a, up_b)
    with np.errstate(invalid="ignore"):
        val = np.maximum(hi - lo, 0.0)
    return np.where(hi == -INF, -INF, val)


def triangle_upper_via(i: int, j: int, k: int, state: BoundState) -> float:
    """Upper bound on d[j,k] through intermediary i."""
    if len({i, j, k}) < 3:
        raise DomainError("indices must be distinct")
    up = state.upper()
    return float(up[i, j] + up[i, k])


def triangle_lower_via(i: int, j: int, k: int, state: BoundState) -> float:
    """Lower bound on d[j,k] through intermediary i."""
    if len({i, j, k}) < 3:
        raise DomainError("indices must be distinct")
    up, lo = state.upper(), state.lower()
    return float(_clamped_lower(lo[i, j], lo[i, k], up[i, j], up[i, k]))


def _sweep_rows(up, lo, rows, cols):
    """Candidate bounds on pairs (cols[p], k) via intermediary rows[p], all k.

    Returns (upper, lower) arrays of shape (len(rows), n); entries where k
    equals the intermediary or the target row are neutral.
    """
    n = up.shape[0]
    u_a = up[rows, cols][:, None]
    l_a = lo[rows, cols][:, None]
    u_b = up[rows]
    l_b = lo[rows]
    cu = u_a + u_b
    cl = _clamped_lower(l_a, l_b, u_a, u_b)
    p = np.arange(len(rows))
    cu[p, rows] = INF
    cl[p, rows] = -INF
    cu[p, cols] = INF
    cl[p, cols] = -INF
    return cu, cl


def _reduce_by_target(targets, cu, cl, n):
    """Min/max of candidate rows grouped by target row index."""
    order = np.argsort(targets, kind="stable")
    t = targets[order]
    starts = np.flatnonzero(np.r_[True, t[1:] != t[:-1]])
    rows = t[starts]
    best_u = np.minimum.reduceat(cu[order], starts, axis=0)
    best_l = np.maximum.reduceat(cl[order], starts, axis=0)
    return rows, best_u, best_l


def _apply_candidates(Utri, Ltri, rows, best_u, best_l):
    Utri[rows] = np.minimum(Utri[rows], best_u)
    Ltri[rows] = np.maximum(Ltri[rows], best_l)
    np.minimum(Utri, Utri.T, out=Utri)
    np.maximum(Ltri, Ltri.T, out=Ltri)


def _pass(state: BoundState, pairs: np.ndarray, chunk: int) -> None:
    up, lo = state.upper(), state.lower()
    Utri, Ltri = state.Utri.raw(), state.Ltri.raw()
    n = state.n
    new_u = Utri.copy()
    new_l = Ltri.copy()
    for s in range(0, len(pairs), chunk):
        ell = pairs[s:s + chunk, 0]
        tgt = pairs[s:s + chunk, 1]
        cu, cl = _sweep_rows(up, lo, ell, tgt)
        rows, bu, bl = _reduce_by_target(tgt, cu, cl, n)
        new_u[rows] = np.minimum(new_u[rows], bu)
        new_l[rows] = np.maximum(new_l[rows], bl)
    np.minimum(new_u, new_u.T, out=new_u)
    np.maximum(new_l, new_l.T, out=new_l)
    np.fill_diagonal(new_u, INF)
    np.fill_diagonal(new_l, -INF)
    Utri[...] = new_u
    Ltri[...] = new_l


def _chunk_rows(n: int) -> int:
    return max(1, 2_000_000 // max(n, 1))


def propagate_triangle_bounds(state: BoundState, max_passes: int | None = None) -> int:
    """Sweep every intermediary for every pair until nothing changes.

    Triangle bounds only ever tighten (each pass takes the min/max with the
    stored value). Returns the number of passes that changed something.
    """
    n = state.n
    max_passes = n if max_passes is None else max_passes
    ell, tgt = np.nonzero(~np.eye(n, dtype=bool))
    pairs = np.stack([ell, tgt], axis=1)
    changed_passes = 0
    for _ in range(max_passes):
        before_u, before_l = state.Utri.values.copy(), state.Ltri.values.copy()
        _pass(state, pairs, _chunk_rows(n))
        if np.array_equal(before_u, state.Utri.values) and np.array_equal(before_l, state.Ltri.values):
            break
        changed_passes += 1
    return changed_passes


class TrianglePropagator:
    """Incremental propagation that only revisits triples whose inputs moved.

    Produces the same matrices as :func:`propagate_triangle_bounds`: a
    triple whose two input pairs kept their effective bounds since the last
    fixpoint cannot tighten anything.
    """

    def __init__(self, state: BoundState):
        self.state = state
        self._up = state.upper().copy()
        self._lo = state.lower().copy()

    def propagate(self, max_passes: int | None = None) -> int:
        st = self.state
        n = st.n
        max_passes = n if max_passes is None else max_passes
        up, lo = st.upper(), st.lower()
        changed = (up != self._up) | (lo != self._lo)
        passes = 0
        while passes < max_passes:
            ell, tgt = np.nonzero(changed)
            if ell.size == 0:
                break
            _pass(st, np.stack([ell, tgt], axis=1), _chunk_rows(n))
            new_up, new_lo = st.upper(), st.lower()
            changed = (new_up != up) | (new_lo != lo)
            up, lo = new_up, new_lo
            passes += 1
        self._up, self._lo = up.copy(), lo.copy()
        return passes


# -- active sets --------------------------------------------------------------


def active_set(j: int, state: BoundState) -> np.ndarray:
    """Candidates a whose lower bound to j is below the smallest upper bound from j."""
    lo = np.maximum(state.L.values[:, j], state.Ltri.values[:, j])
    thresh = np.min(np.minimum(state.U.values[j], state.Utri.values[j]))
    mask = lo < thresh
    mask[j] = False
    return np.flatnonzero(mask)


def active_set_easy(j: int, state: BoundState) -> np.ndarray:
    """Active set using concentration bounds only.

    a stays if ``L[a,k] <= 2 U[j,k]`` for every k and ``L[a,j] < min_k U[j,k]``.
    """
    U, L = state.U.values, state.L.values
    thresh = U[j].min()
    ok = np.all(L <= 2.0 * U[j][None, :], axis=1)
    mask = ok & (L[:, j] < thresh)
    mask[j] = False
    return np.flatnonzero(mask)


def easy_eliminated(j: int, state: BoundState) -> np.ndarray:
    """Points k with some i satisfying ``2 U[i,j] < L[i,k]``."""
    U, L = state.U.values, state.L.values
    hit = np.any(2.0 * U[:, j][:, None] < L, axis=0)
    hit[j] = False
    return np.flatnonzero(hit)
