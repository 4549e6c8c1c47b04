"""End-to-end acceptance checks for the nine primary criteria.

Each test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
terminal summary. Run alone with ``pytest tests/test_acceptance.py -v``.
Runtime is several minutes.
"""

import math

import numpy as np
import pytest

from nngraph import harness
from nngraph.audit import BoundAuditor
from nngraph.bounds import ConfidencePolicy, propagate_triangle_bounds
from nngraph.generators import check_cluster_condition, generate_separated_clusters
from nngraph.learners import RunConfig, ann_baseline, anneasy, anntri
from nngraph.metric import gap_profile, true_nn_graph
from nngraph.oracles import GaussianOracle

from conftest import random_dataset
from reference import random_config, scalar_propagate, state_from_intervals, walk_upper

pytestmark = pytest.mark.slow

RESULTS: dict[int, str] = {}

CIRCLE = {"generator": "circle_clusters", "params": {"c": 10, "m": 10, "separation_frac": 0.1, "radius": 10}}


def report(criterion: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion} ({title}): {detail}"
    RESULTS[criterion] = line
    print(line)
    assert ok, line


def experiment(**doc) -> harness.ExperimentResult:
    return harness.run_experiment(harness.ExperimentConfig.from_dict(doc))


def table(rows) -> dict:
    return {(r["algorithm"], r["budget"]): r for r in rows}


# -- 1 ------------------------------------------------------------------------------------


def test_criterion_1_delta_correctness():
    trials = 200
    res = experiment(dataset=CIRCLE, oracle={"kind": "gaussian", "sigma": 0.1}, algorithms=["anntri"],
                     trials=trials, budgets=[0], delta=0.1, policy={"kind": "hoeffding"}, round_cap=100_000)
    s = res.summary["anntri"]
    frac = (s["wrong_graph"] + s["failed"]) / trials
    limit = 0.1 + 3 * math.sqrt(0.1 * 0.9 / trials)
    report(1, "delta-correctness", frac <= limit,
           f"wrong-graph fraction {frac:.3f} <= {limit:.3f} over {trials} trials "
           f"(truncated rounds {s['truncated_rounds']}, mean total {s['mean_total_queries']:.0f})")


# -- 2 ------------------------------------------------------------------------------------


def _ordered(a, b) -> bool:
    """a <= b in mean, or the 95% bands overlap."""
    return a["mean_error"] <= b["mean_error"] or b["lo95"] <= a["hi95"]


def test_criterion_2_baseline_ordering():
    budgets = [0, 10, 20, 50, 100, 200, 500, 1000, 2000]
    res = experiment(dataset=CIRCLE, oracle={"kind": "gaussian", "sigma": 0.1},
                     algorithms=["anntri", "ann", "random"], trials=100, budgets=budgets, delta=0.1,
                     policy={"kind": "lil", "epsilon": 0.7, "sigma": 0.1}, budget_mode="round")
    t = table(res.traces)
    checked = [b for b in budgets if b >= 200]
    ok = all(_ordered(t[("anntri", b)], t[("ann", b)]) and _ordered(t[("ann", b)], t[("random", b)])
             for b in checked)
    cells = "; ".join(f"{b}: " + "/".join(f"{t[(a, b)]['mean_error']:.3f}" for a in ("anntri", "ann", "random"))
                      for b in checked)
    report(2, "baseline ordering", ok, f"mean error anntri/ann/random per budget {cells} (100 trials)")


# -- 3 and 4 --------------------------------------------------------------------------------


def test_criterion_3_sqrt_scaling():
    cfg = harness.SweepConfig.from_dict({
        "family": "sqrt_clusters", "sizes": [16, 36, 64, 100, 144], "algorithms": ["anneasy", "random"],
        "trials": 3, "sigma": 0.1, "policy": {"sigma": 0.1}, "margin": 1.1, "gap": 1.0})
    for n in cfg.sizes:
        side = math.isqrt(n)
        ds = harness.sweep_dataset(cfg, n, 0)
        assert all(c.passed for c in check_cluster_condition(ds, ds.labels, cfg.policy(n))), side
    out = harness.run_sweep(cfg)
    easy = out["fits"]["anneasy"]["power"]
    rnd = out["fits"]["random"]["power"]
    ok = 1.2 <= easy["slope"] <= 1.8 and 1.8 <= rnd["slope"] <= 2.2
    report(3, "sqrt(n)-cluster scaling", ok,
           f"anneasy slope {easy['slope']:.3f} [1.2, 1.8], random-to-zero-error slope {rnd['slope']:.3f} [1.8, 2.2]")


def test_criterion_4_hierarchical_scaling():
    cfg = harness.SweepConfig.from_dict({
        "family": "hierarchical", "levels": [2, 3, 4, 5, 6], "algorithms": ["anntri", "anneasy"],
        "trials": 2, "sigma": 0.1, "policy": {"sigma": 0.1}})
    out = harness.run_sweep(cfg)
    s = {a: out["fits"][a]["nlogn"]["slope"] for a in cfg.algorithms}
    ok = all(0.8 <= v <= 1.4 for v in s.values())
    report(4, "hierarchical scaling", ok,
           f"slope of log(total / log n) on log n: anntri {s['anntri']:.3f}, anneasy {s['anneasy']:.3f} "
           f"[0.8, 1.4], n = {out['fits']['anntri']['sizes']}")


# -- 6 ------------------------------------------------------------------------------------------


def _brute_nn(d):
    n = len(d)
    out = []
    for j in range(n):
        best = None
        for k in range(n):
            if k != j and (best is None or d[j][k] < d[j][best]):
                best = k
        out.append(best)
    return out


def test_criterion_6_oracle_equivalence():
    mismatches = 0
    configs = 0
    for n in range(3, 7):
        for seed in range(100):
            rng = np.random.default_rng([n, seed])
            _, intervals = random_config(n, rng, consistent=seed % 2 == 0)
            s = state_from_intervals(n, intervals, ConfidencePolicy("hoeffding", 0.1, n))
            propagate_triangle_bounds(s)
            Ut, Lt = scalar_propagate(s.U.values.tolist(), s.L.values.tolist())
            off = ~np.eye(n, dtype=bool)
            same = (np.allclose(s.Utri.values[off], np.array(Ut)[off], rtol=1e-12)
                    and np.allclose(s.Ltri.values[off], np.array(Lt)[off], rtol=1e-12, atol=1e-12)
                    and np.allclose(s.Utri.values[off], walk_upper(s.U.values)[off], rtol=1e-12))
            mismatches += not same
            configs += 1
    graph_bad = learner_bad = datasets = 0
    for n in range(2, 13):
        for seed in range(5):
            ds = random_dataset(n, 9000 + 10 * n + seed)
            d = ds.d.tolist()
            brute = _brute_nn(d)
            gp = gap_profile(ds)
            brute_gap = [[d[j][k] - d[j][brute[j]] for k in range(n)] for j in range(n)]
            graph_bad += list(true_nn_graph(ds)) != brute
            graph_bad += any(abs(gp.gaps[j, k] - brute_gap[j][k]) > 1e-12
                             for j in range(n) for k in range(n) if k not in (j, brute[j]))
            for learner in (anntri, anneasy, ann_baseline):
                rep = learner(GaussianOracle(ds, 0.0, seed=seed), RunConfig(policy_sigma=0.1))
                learner_bad += list(rep.nn) != brute
            datasets += 1
    ok = mismatches == 0 and graph_bad == 0 and learner_bad == 0
    report(6, "oracle equivalence", ok,
           f"propagation mismatches {mismatches}/{configs} configs (n = 3..6); nn graph and gap mismatches "
           f"{graph_bad}, zero-noise learner mismatches {learner_bad} over {datasets} datasets (n <= 12)")


# -- 5 and 7 share the audited runs -------------------------------------------------------------


@pytest.fixture(scope="module")
def noiseless_audits():
    auditors = []
    for seed in range(50):
        ds = random_dataset([10, 20, 30, 40, 50][seed % 5], 5000 + seed)
        for learner in (anntri, anneasy):
            aud = BoundAuditor(ds.d, noiseless=True)
            learner(GaussianOracle(ds, 0.0, seed=seed), RunConfig(learner.__name__, policy_sigma=0.1),
                    auditor=aud)
            auditors.append(aud)
    return auditors


def _coverage(kind: str, trials: int) -> int:
    pol = ConfidencePolicy(kind, 0.1, 12)
    bad = 0
    for seed in range(trials):
        ds = generate_separated_clusters(3, 4, 1.1, pol, seed=seed)
        aud = BoundAuditor(ds.d)
        anntri(GaussianOracle(ds, 1.0, seed=seed), RunConfig("anntri", 0.1, kind), auditor=aud)
        bad += bool(aud.violations["concentration"] or aud.violations["triangle"])
    return bad


def test_criterion_5_bound_validity(noiseless_audits):
    noiseless = sum(a.violations["concentration"] + a.violations["triangle"] for a in noiseless_audits)
    steps = sum(a.checks["samples"] for a in noiseless_audits)
    trials = 500
    bad = {k: _coverage(k, trials) for k in ("hoeffding", "lil")}
    ok = noiseless == 0 and all(b / trials <= 0.1 for b in bad.values())
    report(5, "bound validity", ok,
           f"noiseless violations {noiseless} over {steps} audited samples (50 seeds, n <= 50); "
           f"noisy violating-trial fraction hoeffding {bad['hoeffding'] / trials:.3f}, "
           f"lil {bad['lil'] / trials:.3f} <= 0.1 over {trials} trials")


def _cross_cluster_leaks(noisy: bool) -> tuple[int, int]:
    leaks = rounds = 0
    for seed in range(20):
        pol = ConfidencePolicy("hoeffding", 0.1, 16)
        ds = generate_separated_clusters(4, 4, 1.1, pol, seed=seed)
        aud = BoundAuditor(ds.d, noiseless=not noisy)
        anntri(GaussianOracle(ds, 1.0 if noisy else 0.0, seed=seed), RunConfig("anntri"), auditor=aud)
        if not aud.good_event:
            continue
        seen = set()
        for j in range(ds.n):
            if ds.labels[j] in seen:
                rounds += 1
                leaks += bool(np.any(ds.labels[aud.initial_active[j]] != ds.labels[j]))
            seen.add(ds.labels[j])
    return leaks, rounds


def test_criterion_7_elimination_rules(noiseless_audits):
    kinds = ("easy_elim", "closest", "tri_elim")
    counts = {k: sum(a.violations[k] for a in noiseless_audits) for k in kinds}
    leaks = {m: _cross_cluster_leaks(m == "noisy") for m in ("noiseless", "noisy")}
    ok = not any(counts.values()) and all(v[0] == 0 for v in leaks.values())
    report(7, "elimination rules", ok,
           f"violations {counts}; cross-cluster candidates in later cluster rounds "
           + ", ".join(f"{m} {v[0]}/{v[1]}" for m, v in leaks.items()))


# -- 8 ------------------------------------------------------------------------------------------


def _first_reaching(t, alg, budgets, level=0.1):
    for b in budgets:
        if t[(alg, b)]["mean_error"] <= level:
            return b
    return None


def test_criterion_8_triplet_gains():
    budgets = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000]
    trials = 5
    res = experiment(dataset={"generator": "circle_clusters",
                              "params": {"c": 5, "m": 17, "separation_frac": 0.1, "radius": 10}},
                     oracle={"kind": "triplet", "sharpness": 1.0}, algorithms=["anntri", "random"],
                     trials=trials, budgets=budgets, delta=0.1,
                     policy={"kind": "lil", "sigma": 0.5}, budget_mode="round")
    t = table(res.traces)
    n = 85
    a, r = _first_reaching(t, "anntri", budgets), _first_reaching(t, "random", budgets)
    if a is None:
        ok, ratio = False, "n/a"
    elif r is None:
        ok, ratio = True, f"> {budgets[-1] / a:.1f}x (random at {t[('random', budgets[-1])]['mean_error']:.3f} " \
                          f"after {budgets[-1] * n} queries)"
    else:
        ok, ratio = a < r, f"{r / a:.1f}x"
    report(8, "triplet-oracle gains", ok,
           f"queries to 10% error: anntri {None if a is None else a * n}, "
           f"random {None if r is None else r * n}; measured ratio {ratio} ({trials} trials, n = {n})")


# -- 9 ------------------------------------------------------------------------------------------


def test_criterion_9_triangulation():
    budgets = [10, 20, 50, 100, 200, 500, 1000, 2000]
    res = experiment(dataset=CIRCLE, oracle={"kind": "gaussian", "sigma": 1.0},
                     algorithms=["anntri", "triangulation"], trials=100, budgets=budgets, delta=0.1,
                     policy={"kind": "lil", "sigma": 1.0}, budget_mode="round",
                     triangulation_anchors="random")
    t = table(res.traces)
    ok = all(t[("anntri", b)]["mean_error"] < t[("triangulation", b)]["mean_error"] for b in budgets)
    cells = "; ".join(f"{b}: {t[('anntri', b)]['mean_error']:.3f}/{t[('triangulation', b)]['mean_error']:.3f}"
                      for b in budgets)
    report(9, "triangulation comparison", ok, f"mean error anntri/triangulation per budget {cells} (100 trials)")
