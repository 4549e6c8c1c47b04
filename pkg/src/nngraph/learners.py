"""Adaptive nearest-neighbor learners and the sampling baselines.

The three elimination learners share one round engine. Within a round it
samples every active candidate whose count equals the active minimum
(ascending index on ties), and it looks ahead over blocks of such steps on
peeked oracle samples, committing only up to the first step at which the
active set would change. The committed query sequence is the same as a
one-query-at-a-time implementation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import (BoundState, ConfidencePolicy, TrianglePropagator, active_set,
                     active_set_easy)
from .errors import DomainError, EmptyActiveSet, SingularAnchorError
from .metric import SymmetricMatrix
from .oracles import DistanceOracle

ALGORITHMS = ("anntri", "anneasy", "ann", "random", "triangulation")
_MODES = {"anntri": "tri", "ann": "none", "anneasy": "easy"}


@dataclass(frozen=True)
class RunConfig:
    """Learner settings. The per-round level ``delta / n`` is derived, never set."""

    algorithm: str = "anntri"
    delta: float = 0.1
    policy_kind: str = "hoeffding"
    epsilon: float = 0.7
    policy_sigma: float = 1.0
    round_cap: int = 100_000
    seed: int = 0
    shuffle_order: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise DomainError(f"unknown algorithm {self.algorithm!r}")
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.round_cap < 1:
            raise DomainError("round_cap must be positive")

    def policy(self, n: int) -> ConfidencePolicy:
        return ConfidencePolicy(self.policy_kind, self.delta, n, self.epsilon, self.policy_sigma)

    def round_delta(self, n: int) -> float:
        return self.delta / n


@dataclass
class RunReport:
    algorithm: str
    nn: np.ndarray
    queries: SymmetricMatrix
    total_queries: int
    per_round_trace: dict[int, list[tuple[int, int, int]]] = field(default_factory=dict)
    truncated_rounds: list[int] = field(default_factory=list)
    checkpoints: list[tuple[int, np.ndarray]] = field(default_factory=list)
    round_grid: list[int] = field(default_factory=list)
    round_estimates: np.ndarray | None = None
    round_order: list[int] = field(default_factory=list)
    stopped: bool = False
    wall_clock: float = 0.0

    def to_json(self, include_queries: bool = False) -> dict:
        doc = {
            "algorithm": self.algorithm,
            "nn": self.nn.tolist(),
            "total_queries": self.total_queries,
            "truncated_rounds": list(self.truncated_rounds),
            "stopped": self.stopped,
        }
        if include_queries:
            doc["queries"] = self.queries.lower_triangle()
        return doc


def current_estimates(state_T: np.ndarray, dhat: np.ndarray, answers: np.ndarray) -> np.ndarray:
    """Finished rounds keep their answer; other points take the empirical argmin
    over sampled pairs, or -1 when nothing involving them has been sampled."""
    masked = np.where(state_T > 0, dhat, np.inf)
    np.fill_diagonal(masked, np.inf)
    est = np.argmin(masked, axis=1)
    est[~np.isfinite(masked.min(axis=1))] = -1
    done = answers >= 0
    est[done] = answers[done]
    return est


class _Stop(Exception):
    pass


def active_estimate(T: np.ndarray, dhat: np.ndarray, j: int, active: np.ndarray) -> int:
    """Empirical argmin of d[j, a] over sampled active a (lowest index on ties), -1 if none."""
    if active.size == 0:
        return -1
    vals = np.where(T[active, j] > 0, dhat[active, j], np.inf)
    k = int(np.argmin(vals))
    return int(active[k]) if np.isfinite(vals[k]) else -1


class _Ledger:
    """Query accounting: global checkpoints, round-local checkpoints and early stop."""

    def __init__(self, n: int, checkpoints, stop_at, round_checkpoints=None):
        self.total = 0
        self.answers = np.full(n, -1, dtype=np.int64)
        self.pending = sorted(int(c) for c in (checkpoints or ()))
        self.records: list[tuple[int, np.ndarray]] = []
        self.stop_at = None if stop_at is None else int(stop_at)
        self.round_grid = sorted(int(c) for c in (round_checkpoints or ()))
        self.round_est = np.full((n, len(self.round_grid)), -1, dtype=np.int64)
        self.round_j: int | None = None
        self.round_used = 0
        self.round_next = 0
        self.active: np.ndarray | None = None

    def start_round(self, j: int) -> None:
        self.round_j, self.round_used, self.round_next = j, 0, 0
        self.active = None

    def estimates(self, T: np.ndarray, dhat: np.ndarray) -> np.ndarray:
        est = current_estimates(T, dhat, self.answers)
        if self.round_j is not None and self.active is not None:
            est[self.round_j] = active_estimate(T, dhat, self.round_j, self.active)
        return est

    def end_round(self, answer: int) -> None:
        self.answers[self.round_j] = answer
        self.round_est[self.round_j, self.round_next:] = answer
        self.round_j = None

    def add(self, k: int) -> None:
        self.total += k
        self.round_used += k

    def room(self) -> int | None:
        """Queries allowed before the next checkpoint or the stop budget."""
        limits = []
        if self.pending:
            limits.append(self.pending[0] - self.total)
        if self.stop_at is not None:
            limits.append(self.stop_at - self.total)
        if self.round_j is not None and self.round_next < len(self.round_grid):
            limits.append(self.round_grid[self.round_next] - self.round_used)
        return min(limits) if limits else None

    def flush(self, T: np.ndarray, dhat: np.ndarray) -> None:
        while self.pending and self.pending[0] <= self.total:
            c = self.pending.pop(0)
            self.records.append((c, self.estimates(T, dhat)))
        if self.round_j is not None:
            while self.round_next < len(self.round_grid) and self.round_grid[self.round_next] <= self.round_used:
                self.round_est[self.round_j, self.round_next] = self.estimates(T, dhat)[self.round_j]
                self.round_next += 1
        if self.stop_at is not None and self.total >= self.stop_at:
            raise _Stop

    def finish(self, T: np.ndarray, dhat: np.ndarray) -> None:
        if self.pending:
            est = self.estimates(T, dhat)
            self.records.extend((c, est.copy()) for c in self.pending)
            self.pending = []


class _Engine:
    def __init__(self, state: BoundState, oracle: DistanceOracle, mode: str, cap: int,
                 ledger: _Ledger, auditor=None):
        self.state = state
        self.oracle = oracle
        self.mode = mode
        self.cap = cap
        self.ledger = ledger
        self.auditor = auditor
        self.n = state.n
        self.trace: dict[int, list[tuple[int, int, int]]] = {}
        self.truncated: list[int] = []
        self.propagator = TrianglePropagator(state) if mode == "tri" else None

    def active(self, j: int) -> np.ndarray:
        if self.mode == "easy":
            return active_set_easy(j, self.state)
        return active_set(j, self.state)

    # -- one round --------------------------------------------------------

    def run_round(self, j: int, round_index: int) -> int:
        st = self.state
        if self.propagator is not None:
            self.propagator.propagate()
        A = self.active(j)
        if self.auditor is not None:
            self.auditor.round_start(j, st, A, self.mode)
        trace = self.trace.setdefault(j, [])
        used = 0
        block = 4
        while True:
            if A.size == 0:
                raise EmptyActiveSet(j, round_index)
            self.ledger.active = A
            trace.append((self.ledger.total, self._leader(j, A), int(A.size)))
            if A.size == 1:
                return int(A[0])
            if used >= self.cap:
                self.truncated.append(j)
                return self._leader(j, A)
            width = block if self.mode != "easy" else min(block, max(1, 4_000_000 // (self.n * A.size)))
            width = max(1, min(width, 400_000 // A.size, self.cap - used))
            plan = self._plan(j, A, width)
            steps, change_at = plan["steps"], plan["change_at"]
            sizes = plan["sizes"]
            per_step = np.cumsum(sizes)
            last = change_at if change_at is not None else steps
            budget = self.cap - used
            full = int(np.searchsorted(per_step, budget, side="right"))
            if full < last:
                k = budget
                self._commit(j, plan, k)
                used += k
                self.truncated.append(j)
                return self._leader(j, A)
            k = int(per_step[last - 1])
            self._commit(j, plan, k)
            used += k
            if change_at is None:
                block = min(block * 2, 1 << 16)
                continue
            block = max(4, block // 2)
            A = self.active(j)

    def _leader(self, j: int, A: np.ndarray) -> int:
        st = self.state
        vals = np.where(st.T.values[A, j] > 0, st.dhat.values[A, j], np.inf)
        return int(A[int(np.argmin(vals))])

    # -- look-ahead over a block of sampling steps ------------------------

    def _plan(self, j: int, A: np.ndarray, B: int) -> dict:
        st = self.state
        T0 = st.T.values[A, j].astype(np.int64)
        S0 = st.sums()[A, j]
        m0 = int(T0.min())
        need = np.maximum(0, m0 + B - T0)
        prefix = []
        for a, s0, k in zip(A, S0, need):
            vals = self.oracle.peek(int(a), j, int(k))
            prefix.append(np.cumsum(np.concatenate(([s0], vals))))
        t = np.arange(1, B + 1)
        K = np.maximum(0, m0 + t[None, :] - T0[:, None])          # new samples of a after step t
        counts = T0[:, None] + K
        sums = np.stack([p[k] for p, k in zip(prefix, K)])
        rad = st.policy.radius(counts)
        U = sums / counts + rad
        L = sums / counts - rad
        change = self._changes(j, A, U, L)
        hit = np.flatnonzero(change)
        sizes = (K - np.concatenate([np.zeros((len(A), 1), np.int64), K[:, :-1]], axis=1)).sum(axis=0)
        return {"A": A, "K": K, "steps": B, "change_at": int(hit[0]) + 1 if hit.size else None,
                "sizes": sizes}

    def _changes(self, j: int, A: np.ndarray, U: np.ndarray, L: np.ndarray) -> np.ndarray:
        """Per step, whether the active set computed from the stepped bounds differs from A."""
        st = self.state
        n = self.n
        out_mask = np.ones(n, dtype=bool)
        out_mask[A] = False
        out_mask[j] = False
        if self.mode == "easy":
            Ustat = st.U.values[j]
            thresh_static = Ustat[out_mask].min() if out_mask.any() else np.inf
            thresh = np.minimum(thresh_static, U.min(axis=0))
            Lm = st.L.values
            # candidate a is blocked if some k has L[a,k] > 2 U[j,k]
            static_k = np.ones(n, dtype=bool)
            static_k[A] = False
            blocked_static = np.any(Lm[:, static_k] > 2.0 * Ustat[static_k][None, :], axis=1)
            LA = Lm[:, A]
            step_block = np.any(LA[:, :, None] > 2.0 * U[None, :, :], axis=1)  # (n, B)
            blocked = blocked_static[:, None] | step_block
            Lj = np.broadcast_to(Lm[:, j][:, None], (n, U.shape[1])).copy()
            Lj[A] = L
            act = ~blocked & (Lj < thresh[None, :])
            act[j] = False
            want = np.zeros(n, dtype=bool)
            want[A] = True
            return np.any(act != want[:, None], axis=0)
        Utri_j = st.Utri.values[A, j][:, None]
        Ltri_j = st.Ltri.values[A, j][:, None]
        Ueff = np.minimum(U, Utri_j)
        Leff = np.maximum(L, Ltri_j)
        up_row = np.minimum(st.U.values[j], st.Utri.values[j])
        thresh_static = up_row[out_mask].min() if out_mask.any() else np.inf
        thresh = np.minimum(thresh_static, Ueff.min(axis=0))
        lo_col = np.maximum(st.L.values[:, j], st.Ltri.values[:, j])
        enter_lo = lo_col[out_mask].min() if out_mask.any() else np.inf
        leaves = np.any(Leff >= thresh[None, :], axis=0)
        enters = enter_lo < thresh
        return leaves | enters

    # -- commit a prefix of the planned query sequence ----------------------

    def _commit(self, j: int, plan: dict, k: int) -> None:
        """Commit the first k queries of the plan (step by step, ascending index)."""
        A, K = plan["A"], plan["K"]
        step = np.diff(np.concatenate([np.zeros((len(A), 1), np.int64), K], axis=1), axis=1)
        t_idx, a_idx = np.nonzero(step.T)
        seq = A[a_idx[:k]]
        st = self.state
        ledger = self.ledger
        pos = 0
        while pos < seq.size:
            room = ledger.room()
            end = seq.size if room is None else min(seq.size, pos + max(room, 0))
            if end > pos:
                self._record(j, seq[pos:end])
                ledger.add(end - pos)
                pos = end
            ledger.flush(st.T.values, st.dhat.values)

    def _record(self, j: int, partners: np.ndarray) -> None:
        """Take the oracle samples for ``partners`` (in order) and update the bounds."""
        uniq, counts = np.unique(partners, return_counts=True)
        vals = np.empty(partners.size)
        for a, c in zip(uniq, counts):
            vals[partners == a] = self.oracle.take(int(a), j, int(c))
        st = self.state
        if self.auditor is not None:
            T_before = st.T.values[:, j].copy()
            S_before = st.sums()[:, j].copy()
        st.record_samples(j, partners, vals)
        if self.auditor is not None:
            self.auditor.samples(j, partners, vals, T_before, S_before, st)


def _run_elimination(algorithm: str, oracle: DistanceOracle, config: RunConfig, checkpoints=None,
                     stop_at=None, auditor=None, round_checkpoints=None) -> RunReport:
    start = time.perf_counter()
    n = oracle.n
    state = BoundState(n, config.policy(n))
    ledger = _Ledger(n, checkpoints, stop_at, round_checkpoints)
    engine = _Engine(state, oracle, _MODES[algorithm], config.round_cap, ledger, auditor)
    order = list(range(n))
    if config.shuffle_order:
        order = np.random.default_rng(config.seed).permutation(n).tolist()
    stopped = False
    try:
        ledger.flush(state.T.values, state.dhat.values)
        for r, j in enumerate(order):
            ledger.start_round(j)
            ledger.end_round(engine.run_round(j, r))
    except _Stop:
        stopped = True
    ledger.finish(state.T.values, state.dhat.values)
    nn = current_estimates(state.T.values, state.dhat.values, ledger.answers)
    return RunReport(
        algorithm=algorithm, nn=nn, queries=state.T.copy(), total_queries=ledger.total,
        per_round_trace=engine.trace, truncated_rounds=sorted(engine.truncated),
        checkpoints=ledger.records, round_grid=ledger.round_grid, round_estimates=ledger.round_est,
        round_order=order, stopped=stopped,
        wall_clock=time.perf_counter() - start,
    )


def anntri(oracle: DistanceOracle, config: RunConfig, **kw) -> RunReport:
    """Round-by-round elimination with confidence and triangle bounds."""
    return _run_elimination("anntri", oracle, config, **kw)


def anneasy(oracle: DistanceOracle, config: RunConfig, **kw) -> RunReport:
    """Elimination with the concentration-only easy active set."""
    return _run_elimination("anneasy", oracle, config, **kw)


def ann_baseline(oracle: DistanceOracle, config: RunConfig, **kw) -> RunReport:
    """Elimination with triangle bounds left at +-inf; symmetric reuse still applies."""
    return _run_elimination("ann", oracle, config, **kw)


def random_baseline(oracle: DistanceOracle, budget: int | None, seed: int = 0, checkpoints=None,
                    truth: np.ndarray | None = None, max_passes: int = 100_000) -> RunReport:
    """Uniform sampling over unordered pairs, one seeded random permutation per pass.

    Stops after ``budget`` queries. With ``budget=None`` and ``truth`` given it
    stops at the first pass end whose empirical argmin graph equals ``truth``.
    """
    start = time.perf_counter()
    n = oracle.n
    if budget is None and truth is None:
        raise DomainError("random baseline needs a budget or a truth graph to stop at")
    rows, cols = np.triu_indices(n, 1)
    P = rows.size
    rng = np.random.default_rng(seed)
    sums = np.zeros(P)
    counts = np.zeros(P, dtype=np.int64)
    pending = sorted(int(c) for c in (checkpoints or ()))
    records = []
    total = 0
    answers = np.full(n, -1, dtype=np.int64)

    def matrices():
        T = np.zeros((n, n), dtype=np.int64)
        D = np.zeros((n, n))
        T[rows, cols] = T[cols, rows] = counts
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        D[rows, cols] = D[cols, rows] = mean
        return T, D

    def record_until(limit):
        nonlocal pending
        if pending and pending[0] <= limit:
            T, D = matrices()
            est = current_estimates(T, D, answers)
            while pending and pending[0] <= limit:
                records.append((pending.pop(0), est.copy()))

    record_until(0)
    chunk = 32
    passes = 0
    done = budget == 0
    while not done and passes < max_passes:
        width = chunk if budget is None else min(chunk, -(-(budget - total) // P))
        vals = np.stack([oracle.peek(int(a), int(b), width) for a, b in zip(rows, cols)])
        used = np.zeros(P, dtype=np.int64)
        for w in range(width):
            perm = rng.permutation(P)
            # split the pass at checkpoints and the budget
            pos = 0
            while pos < P:
                stop = P
                if pending:
                    stop = min(stop, pos + pending[0] - total)
                if budget is not None:
                    stop = min(stop, pos + budget - total)
                idx = perm[pos:stop]
                sums[idx] += vals[idx, w]
                counts[idx] += 1
                used[idx] += 1
                total += idx.size
                pos = stop
                record_until(total)
                if budget is not None and total >= budget:
                    done = True
                    break
            passes += 1
            if done:
                break
            if truth is not None and budget is None:
                T, D = matrices()
                if np.array_equal(current_estimates(T, D, answers), truth):
                    done = True
                    break
        for p in np.flatnonzero(used):
            oracle.take(int(rows[p]), int(cols[p]), int(used[p]))
        chunk = min(chunk * 2, 256)
    T, D = matrices()
    record_until(np.iinfo(np.int64).max)
    nn = current_estimates(T, D, answers)
    return RunReport(
        algorithm="random", nn=nn, queries=SymmetricMatrix.from_array(T, diagonal=0), total_queries=total,
        checkpoints=records, stopped=budget is not None and total >= budget,
        wall_clock=time.perf_counter() - start,
    )


def random_round_baseline(oracle: DistanceOracle, round_budget: int, seed: int = 0,
                          round_checkpoints=None) -> RunReport:
    """Point-by-point random sampling: round i queries ``round_budget`` uniformly
    chosen partners of i, reusing every earlier sample of a pair via symmetry."""
    start = time.perf_counter()
    n = oracle.n
    if round_budget < 0:
        raise DomainError("round_budget must be nonnegative")
    rng = np.random.default_rng(seed)
    grid = sorted(int(c) for c in (round_checkpoints or ()))
    est = np.full((n, len(grid)), -1, dtype=np.int64)
    sums = np.zeros((n, n))
    T = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        draw = rng.integers(0, n - 1, size=round_budget)
        partners = draw + (draw >= i)
        vals = np.empty(round_budget)
        uniq, counts = np.unique(partners, return_counts=True)
        for a, c in zip(uniq, counts):
            vals[partners == a] = oracle.take(i, int(a), int(c))
        for g, t in enumerate(grid):
            t = min(t, round_budget)
            s_row = sums[i] + np.bincount(partners[:t], weights=vals[:t], minlength=n)
            c_row = T[i] + np.bincount(partners[:t], minlength=n)
            row = np.where(c_row > 0, s_row / np.maximum(c_row, 1), np.inf)
            row[i] = np.inf
            k = int(np.argmin(row))
            est[i, g] = k if np.isfinite(row[k]) else -1
        add_s = np.bincount(partners, weights=vals, minlength=n)
        add_c = np.bincount(partners, minlength=n)
        sums[i] += add_s
        sums[:, i] += add_s
        T[i] += add_c
        T[:, i] += add_c
    dhat = np.where(T > 0, sums / np.maximum(T, 1), 0.0)
    nn = current_estimates(T, dhat, np.full(n, -1, dtype=np.int64))
    return RunReport(
        algorithm="random", nn=nn, queries=SymmetricMatrix.from_array(T, diagonal=0),
        total_queries=int(np.triu(T, 1).sum()), round_grid=grid, round_estimates=est,
        round_order=list(range(n)), stopped=True, wall_clock=time.perf_counter() - start,
    )


def complete_squared_distances(L: np.ndarray, A: np.ndarray) -> np.ndarray:
    """``L A^-1 L^T``: all squared distances from squared distances to the anchors.

    ``L`` is n x m (squared distances to the m anchors) and ``A`` the m x m
    anchor block. Raises SingularAnchorError for a degenerate anchor set.
    """
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularAnchorError(f"anchor block is singular (condition {cond:.3g})")
    D = L @ np.linalg.solve(A, L.T)
    return (D + D.T) / 2.0


def triangulation_baseline(oracle, dim: int, budget: int, checkpoints=None, anchors=None) -> RunReport:
    """Estimate squared point-to-anchor distances and complete the matrix.

    Anchors default to the first ``dim + 2`` points and their mutual distances
    are exact. Point-anchor pairs are sampled round-robin; ``mean(x^2) - sigma^2``
    estimates each squared distance and ``L A^-1 L^T`` completes the matrix.
    """
    start = time.perf_counter()
    n = oracle.n
    m = dim + 2
    if n <= m:
        raise DomainError(f"need more than {m} points for {dim}-dimensional triangulation")
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    anc = np.arange(m) if anchors is None else np.asarray(anchors, dtype=np.int64)
    if anc.shape != (m,) or len(set(anc.tolist())) != m or anc.min() < 0 or anc.max() >= n:
        raise DomainError(f"need {m} distinct anchor indices")
    is_anchor = np.zeros(n, dtype=bool)
    is_anchor[anc] = True
    d = np.asarray(oracle.dataset.d, dtype=float)
    A = d[np.ix_(anc, anc)] ** 2
    complete_squared_distances(A, A)  # validates the anchor block
    sigma2 = getattr(oracle, "sigma", 0.0) ** 2
    pairs = [(int(p), c) for p in np.flatnonzero(~is_anchor) for c in range(m)]
    P = len(pairs)

    def counts_at(total):
        c = np.full(P, total // P, dtype=np.int64)
        c[: total % P] += 1
        return c

    final = counts_at(budget)
    vals = [oracle.take(p, int(anc[c]), int(k)) for (p, c), k in zip(pairs, final)]

    def estimate(total):
        c = counts_at(min(total, budget))
        L = np.zeros((n, m))
        L[anc] = A
        ok = np.ones(n, dtype=bool)
        for idx, (p, a) in enumerate(pairs):
            if c[idx] == 0:
                ok[p] = False
                continue
            x = vals[idx][: c[idx]]
            L[p, a] = np.mean(x * x) - sigma2
        D_hat = complete_squared_distances(L, A)
        np.fill_diagonal(D_hat, np.inf)
        D_hat = np.where(ok[:, None] & ok[None, :], D_hat, np.inf)
        est = np.argmin(D_hat, axis=1)
        est[~np.isfinite(D_hat.min(axis=1))] = -1
        return est

    records = [(int(cp), estimate(int(cp))) for cp in sorted(checkpoints or ())]
    T = np.zeros((n, n), dtype=np.int64)
    for (p, c), k in zip(pairs, final):
        T[p, anc[c]] = T[anc[c], p] = k
    return RunReport(
        algorithm="triangulation", nn=estimate(budget), queries=SymmetricMatrix.from_array(T, diagonal=0),
        total_queries=int(budget), checkpoints=records, stopped=True,
        wall_clock=time.perf_counter() - start,
    )


def run_algorithm(algorithm: str, oracle: DistanceOracle, config: RunConfig, budget: int | None = None,
                  checkpoints=None, truth=None, dim: int = 2, auditor=None,
                  round_checkpoints=None, anchors=None) -> RunReport:
    """Dispatch by name; ``budget`` is a total query budget."""
    if algorithm in _MODES:
        return _run_elimination(algorithm, oracle, config, checkpoints=checkpoints, stop_at=budget,
                                auditor=auditor, round_checkpoints=round_checkpoints)
    if algorithm == "random":
        return random_baseline(oracle, budget, seed=config.seed, checkpoints=checkpoints, truth=truth)
    if algorithm == "triangulation":
        if budget is None:
            raise DomainError("triangulation needs a budget")
        return triangulation_baseline(oracle, dim, budget, checkpoints=checkpoints, anchors=anchors)
    raise DomainError(f"unknown algorithm {algorithm!r}")
