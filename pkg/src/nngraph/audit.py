"""Runtime checks of bound validity and of the elimination rules.

An auditor is handed to a learner and sees every committed sample and every
round start. It compares bounds against the true distances, which a learner
never sees.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .bounds import BoundState, easy_eliminated


class BoundAuditor:
    """Counts violations by kind; ``strict`` raises on the first one.

    Kinds:
      concentration   L <= d <= U after some sample
      ci_width        U <= d + 2 C(T) and L >= d - 2 C(T) while no bound has failed
      triangle        finite triangle bounds bracket d at a round start
      easy_elim       a k with 2 U[i,j] < L[i,k] for some i is still active
      closest         with (j, nearest) and (j, second nearest) unsampled, one of them is inactive
      tri_elim        a sampled i with d[i,k] - 2 d[i,j] > 6 C(1) leaves k active
    ``closest`` and ``tri_elim`` are checked only when ``noiseless`` is set or,
    for ``tri_elim``, while no concentration bound has failed.
    """

    def __init__(self, distances, strict: bool = False, noiseless: bool = False, paths: bool = True):
        self.d = np.asarray(distances, dtype=float)
        self.strict = strict
        self.noiseless = noiseless
        self.paths = paths
        self.violations: Counter = Counter()
        self.first: dict[str, tuple] = {}
        self.initial_active: dict[int, np.ndarray] = {}
        self.checks: Counter = Counter()
        order = np.argsort(np.where(np.eye(len(self.d), dtype=bool), np.inf, self.d), axis=1, kind="stable")
        self._nearest = order[:, 0]
        self._second = order[:, 1] if len(self.d) > 2 else order[:, 0]

    @property
    def clean(self) -> bool:
        return not self.violations

    @property
    def good_event(self) -> bool:
        return self.violations["concentration"] == 0

    def _flag(self, kind: str, detail: tuple) -> None:
        self.violations[kind] += 1
        self.first.setdefault(kind, detail)
        if self.strict:
            raise AssertionError(f"{kind} violated: {detail}")

    def samples(self, j: int, partners, values, T_before, S_before, state: BoundState) -> None:
        """Replay committed samples one at a time and check every intermediate bound."""
        self.checks["samples"] += len(partners)
        if not self.paths:
            return
        pol = state.policy
        for a in np.unique(partners):
            v = values[partners == a]
            counts = T_before[a] + np.arange(1, v.size + 1)
            sums = np.cumsum(np.concatenate(([S_before[a]], v)))[1:]
            rad = pol.radius(counts)
            mean = sums / counts
            U, L = mean + rad, mean - rad
            d = self.d[a, j]
            bad = np.flatnonzero((L > d) | (U < d))
            if bad.size:
                self._flag("concentration", (int(a), j, int(counts[bad[0]])))
            if self.good_event:
                wide = np.flatnonzero((U > d + 2 * rad) | (L < d - 2 * rad))
                if wide.size:
                    self._flag("ci_width", (int(a), j, int(counts[wide[0]])))

    def round_start(self, j: int, state: BoundState, active: np.ndarray, mode: str) -> None:
        self.initial_active[j] = active.copy()
        in_active = np.zeros(state.n, dtype=bool)
        in_active[active] = True
        self.checks["rounds"] += 1
        if mode == "tri":
            Ut, Lt = state.Utri.values, state.Ltri.values
            off = ~np.eye(state.n, dtype=bool)
            bad = off & ((np.isfinite(Ut) & (Ut < self.d)) | (np.isfinite(Lt) & (Lt > self.d)))
            if bad.any() and (self.noiseless or self.good_event):
                a, b = np.argwhere(bad)[0]
                self._flag("triangle", (int(a), int(b), j))
        if mode in ("tri", "easy"):
            gone = easy_eliminated(j, state)
            if in_active[gone].any():
                self._flag("easy_elim", (j, int(gone[in_active[gone]][0])))
        if mode == "tri" and self.noiseless:
            T = state.T.values
            a, b = int(self._nearest[j]), int(self._second[j])
            if T[j, a] == 0 and T[j, b] == 0 and not (in_active[a] and in_active[b]):
                self._flag("closest", (j, a, b))
        if mode in ("tri", "easy") and (self.noiseless or self.good_event):
            self._tri_elim(j, state, in_active)

    def _tri_elim(self, j: int, state: BoundState, in_active: np.ndarray) -> None:
        T = state.T.values
        six_c1 = 6.0 * state.policy.radius(1)
        d = self.d
        for i in np.flatnonzero(T[:, j] > 0):
            ks = np.flatnonzero((T[i] > 0) & (d[i] - 2.0 * d[i, j] > six_c1))
            ks = ks[ks != j]
            if in_active[ks].any():
                self._flag("tri_elim", (int(i), j, int(ks[in_active[ks]][0])))
                return
