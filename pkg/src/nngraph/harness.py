"""Seeded multi-trial experiments, error traces, scaling fits and persistence."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy
from scipy import stats

from . import __version__
from .bounds import ConfidencePolicy
from .errors import ConfigError, DomainError, NNGraphError
from .generators import (generate_circle_clusters, generate_circulant, generate_hierarchical,
                         generate_separated_clusters)
from .learners import (RunConfig, random_baseline, random_round_baseline, run_algorithm,
                       triangulation_baseline)
from .metric import Dataset, complexity_term, gap_profile, nn_sets
from .oracles import GaussianOracle, load_triplet_table, synth_triplet_probs

OUTPUT_ENV = "NNGRAPH_OUTPUT_DIR"
ELIMINATION = ("anntri", "anneasy", "ann")
DEFAULTS = {
    "name": "experiment",
    "regenerate_dataset": True,
    "delta": 0.1,
    "policy": {},
    "budget_mode": "total",
    "round_cap": 100_000,
    "base_seed": 0,
    "run_to_completion": True,
    "triangulation_dim": 2,
    "triangulation_anchors": "first",
    "audit": False,
}
SWEEP_DEFAULTS = {
    "name": "sweep",
    "delta": 0.1,
    "policy": {},
    "sigma": 1.0,
    "margin": 1.1,
    "gap": 1.0,
    "round_cap": 100_000,
    "base_seed": 0,
}


def _schema(name: str) -> dict:
    return json.loads(resources.files("nngraph").joinpath("schema", name).read_text())


def _validate(doc: dict, schema_name: str) -> None:
    try:
        jsonschema.validate(doc, _schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment document with defaults filled in."""

    doc: dict

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        _validate(doc, "experiment.schema.json")
        full = {**DEFAULTS, **doc}
        full["policy"] = {"kind": "hoeffding", "epsilon": 0.7, "sigma": 1.0, **full["policy"]}
        budgets = full["budgets"]
        if any(b >= c for b, c in zip(budgets, budgets[1:])):
            raise ConfigError("budgets must be strictly increasing")
        if "triangulation" in full["algorithms"] and full["oracle"]["kind"] != "gaussian":
            raise ConfigError("triangulation needs a gaussian oracle over Euclidean data")
        return cls(full)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(doc)

    def __getattr__(self, key):
        try:
            return self.doc[key]
        except KeyError:
            raise AttributeError(key) from None

    def policy(self, n: int) -> ConfidencePolicy:
        p = self.doc["policy"]
        return ConfidencePolicy(p["kind"], self.doc["delta"], n, p["epsilon"], p["sigma"])

    def run_config(self, algorithm: str, seed: int) -> RunConfig:
        p = self.doc["policy"]
        return RunConfig(algorithm, self.doc["delta"], p["kind"], p["epsilon"], p["sigma"],
                         self.doc["round_cap"], seed)


def build_dataset(spec: dict, policy_for, seed: int) -> Dataset:
    """``policy_for(n)`` supplies the policy the separation-aware generators need."""
    if "file" in spec:
        return Dataset.load(spec["file"])
    params = dict(spec.get("params", {}))
    name = spec["generator"]
    try:
        if name == "circle_clusters":
            return generate_circle_clusters(seed=seed, **params)
        if name == "circulant":
            return generate_circulant(**params)
        if name == "separated_clusters":
            n = params["num_clusters"] * params["cluster_size"]
            return generate_separated_clusters(policy=policy_for(n), seed=seed, **params)
        if name == "hierarchical":
            return generate_hierarchical(policy=policy_for(2), seed=seed, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}") from None
    raise ConfigError(f"unknown generator {name!r}")


def build_oracle(spec: dict, dataset: Dataset, seed: int):
    if spec["kind"] == "gaussian":
        return GaussianOracle(dataset, spec.get("sigma", 1.0), seed=seed)
    if "table" in spec:
        doc = json.loads(Path(spec["table"]).read_text())
        return load_triplet_table(doc, fallback=dataset, sharpness=spec["sharpness"], seed=seed)
    return synth_triplet_probs(dataset, spec["sharpness"], seed=seed)


def error_rate(estimates, truth) -> float:
    """Fraction of points whose estimate is not a true nearest neighbor.

    ``truth`` is an index array or a list of minimizer sets; an estimate of -1
    (nothing sampled) is an error.
    """
    est = np.asarray(estimates)
    if len(est) == 0:
        raise DomainError("no points to score")
    if isinstance(truth, np.ndarray) or (len(truth) and not isinstance(truth[0], (set, frozenset))):
        return float(np.mean(est != np.asarray(truth)))
    return float(np.mean([e not in t for e, t in zip(est.tolist(), truth)]))


def anchor_indices(rule: str, n: int, dim: int, seed: int):
    """``first``: points 0..dim+1. ``random``: a seeded uniform choice, sorted."""
    if rule == "first":
        return None
    rng = np.random.default_rng([seed, n, dim])
    return np.sort(rng.choice(n, size=dim + 2, replace=False))


def _estimates(cfg: ExperimentConfig, algorithm: str, oracle, seed: int, auditor=None):
    n = oracle.n
    anchors = anchor_indices(cfg.triangulation_anchors, n, cfg.triangulation_dim, seed)
    budgets = cfg.budgets
    run_cfg = cfg.run_config(algorithm, seed)
    if cfg.budget_mode == "round":
        if algorithm in ELIMINATION:
            rep = run_algorithm(algorithm, oracle, run_cfg, round_checkpoints=budgets, auditor=auditor)
        elif algorithm == "random":
            rep = random_round_baseline(oracle, budgets[-1], seed=seed, round_checkpoints=budgets)
        else:
            active = n - cfg.triangulation_dim - 2
            cps = [b * active for b in budgets]
            rep = triangulation_baseline(oracle, cfg.triangulation_dim, cps[-1], checkpoints=cps,
                                         anchors=anchors)
            return rep, [e for _, e in rep.checkpoints]
        return rep, [rep.round_estimates[:, g] for g in range(len(budgets))]
    cps = [b * n for b in budgets]
    if algorithm in ELIMINATION:
        stop = None if cfg.run_to_completion else cps[-1]
        rep = run_algorithm(algorithm, oracle, run_cfg, budget=stop, checkpoints=cps, auditor=auditor)
    elif algorithm == "random":
        rep = random_baseline(oracle, cps[-1], seed=seed, checkpoints=cps)
    else:
        rep = triangulation_baseline(oracle, cfg.triangulation_dim, cps[-1], checkpoints=cps, anchors=anchors)
    return rep, [e for _, e in rep.checkpoints]


def run_trial(cfg: ExperimentConfig, trial: int) -> list[dict]:
    """All algorithms on one trial. Every algorithm sees the same dataset and the
    same per-pair oracle streams (common random numbers)."""
    from .audit import BoundAuditor

    seed = cfg.base_seed + trial
    dataset = build_dataset(cfg.dataset, cfg.policy, seed if cfg.regenerate_dataset else cfg.base_seed)
    out = []
    for algorithm in cfg.algorithms:
        oracle = build_oracle(cfg.oracle, dataset, seed)
        truth = nn_sets(oracle.dataset)
        rec = {"trial": trial, "algorithm": algorithm, "seed": seed, "n": oracle.n}
        auditor = BoundAuditor(oracle.dataset.d) if cfg.audit and algorithm in ELIMINATION else None
        try:
            rep, ests = _estimates(cfg, algorithm, oracle, seed, auditor)
        except NNGraphError as exc:
            rec.update(failed=True, message=str(exc), errors=None, total_queries=int(oracle.total_calls),
                       wrong=None, truncated_rounds=0)
            out.append(rec)
            continue
        wrong = None
        if algorithm in ELIMINATION and not rep.stopped:
            wrong = error_rate(rep.nn, truth) > 0
        rec.update(failed=False, message=None, errors=[error_rate(e, truth) for e in ests],
                   total_queries=int(rep.total_queries), wrong=wrong,
                   truncated_rounds=len(rep.truncated_rounds))
        if auditor is not None:
            rec["violations"] = dict(sorted(auditor.violations.items()))
        out.append(rec)
    return out


def failure_budget(delta: float, trials: int) -> float:
    """Tolerated failures: ``delta * trials`` plus three standard deviations."""
    return delta * trials + 3.0 * math.sqrt(delta * trials)


def aggregate(records: list[dict], budgets: list[int], algorithms: list[str]) -> list[dict]:
    """Mean error per (algorithm, budget) with a normal-approximation 95% band.

    Trials whose learner raised are left out of the means and counted in the
    summary instead.
    """
    rows = []
    for alg in algorithms:
        errs = np.array([r["errors"] for r in records if r["algorithm"] == alg and not r["failed"]], dtype=float)
        for g, b in enumerate(budgets):
            if errs.size == 0:
                rows.append({"budget": b, "algorithm": alg, "mean_error": float("nan"),
                             "lo95": float("nan"), "hi95": float("nan")})
                continue
            col = errs[:, g]
            mean = float(col.mean())
            half = 1.96 * float(col.std(ddof=1)) / math.sqrt(col.size) if col.size > 1 else 0.0
            rows.append({"budget": b, "algorithm": alg, "mean_error": mean,
                         "lo95": max(0.0, mean - half), "hi95": min(1.0, mean + half)})
    return rows


def summarize(records: list[dict], cfg: ExperimentConfig) -> dict:
    out = {}
    limit = failure_budget(cfg.delta, cfg.trials)
    for alg in cfg.algorithms:
        recs = [r for r in records if r["algorithm"] == alg]
        failed = sum(r["failed"] for r in recs)
        wrong = sum(bool(r["wrong"]) for r in recs)
        totals = [r["total_queries"] for r in recs if not r["failed"]]
        out[alg] = {
            "trials": len(recs),
            "failed": failed,
            "wrong_graph": wrong,
            "failure_fraction": (failed + wrong) / max(len(recs), 1),
            "failure_budget": limit,
            "over_budget": failed + wrong > limit,
            "mean_total_queries": float(np.mean(totals)) if totals else None,
            "truncated_rounds": int(sum(r["truncated_rounds"] for r in recs)),
        }
        viol = [r.get("violations") for r in recs if r.get("violations") is not None]
        if viol:
            out[alg]["trials_with_violations"] = sum(bool(v) for v in viol)
    return out


def manifest(cfg_doc: dict, kind: str = "experiment") -> dict:
    return {
        "kind": kind,
        "config": cfg_doc,
        "nngraph": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seeding": "trial seed = base_seed + trial; datasets, oracles and the random baseline use it",
    }


def traces_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["budget", "algorithm", "mean_error", "lo95", "hi95"], lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


@dataclass
class ExperimentResult:
    records: list[dict]
    traces: list[dict]
    summary: dict
    out_dir: Path | None = None
    exit_code: int = 0


def output_dir(requested=None) -> Path | None:
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return None if requested is None else Path(requested)


def run_experiment(cfg: ExperimentConfig, out_dir=None, progress=None) -> ExperimentResult:
    """Run every trial and, when an output directory is given, persist the bundle:
    trials.ndjson, traces.csv, summary.json and manifest.json."""
    records = []
    for t in range(cfg.trials):
        records.extend(run_trial(cfg, t))
        if progress is not None:
            progress(t + 1, cfg.trials)
    rows = aggregate(records, cfg.budgets, cfg.algorithms)
    summary = summarize(records, cfg)
    code = 2 if any(s["over_budget"] for s in summary.values()) else 0
    result = ExperimentResult(records, rows, summary, exit_code=code)
    target = output_dir(out_dir)
    if target is not None:
        write_bundle(target, cfg, result)
        result.out_dir = target
    return result


def write_bundle(target: Path, cfg: ExperimentConfig, result: ExperimentResult) -> None:
    target.mkdir(parents=True, exist_ok=True)
    with open(target / "trials.ndjson", "w") as fh:
        for r in result.records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    (target / "traces.csv").write_text(traces_csv(result.traces))
    (target / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    (target / "manifest.json").write_text(json.dumps(manifest(cfg.doc), indent=2, sort_keys=True) + "\n")


def load_bundle(run_dir) -> tuple[ExperimentConfig, list[dict]]:
    run_dir = Path(run_dir)
    cfg = ExperimentConfig.from_dict(json.loads((run_dir / "manifest.json").read_text())["config"])
    records = [json.loads(line) for line in (run_dir / "trials.ndjson").read_text().splitlines() if line]
    return cfg, records


# -- scaling ------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    lo95: float
    hi95: float
    r2: float

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "lo95": self.lo95, "hi95": self.hi95,
                "r2": self.r2}


def scaling_fit(sizes, totals, nlogn: bool = False) -> ScalingFit:
    """Least squares slope of log(total) on log(n), or of log(total / log n) with ``nlogn``."""
    n = np.asarray(sizes, dtype=float)
    y = np.asarray(totals, dtype=float)
    if n.shape != y.shape or n.size < 3:
        raise DomainError("need at least three (size, total) pairs")
    if np.any(n <= 1) or np.any(y <= 0):
        raise DomainError("sizes must exceed 1 and totals must be positive")
    if nlogn:
        y = y / np.log(n)
    fit = stats.linregress(np.log(n), np.log(y))
    tq = stats.t.ppf(0.975, n.size - 2)
    return ScalingFit(float(fit.slope), float(fit.intercept), float(fit.slope - tq * fit.stderr),
                      float(fit.slope + tq * fit.stderr), float(fit.rvalue ** 2))


def triangle_indicator(dataset: Dataset, delta: float, policy: ConfidencePolicy | None = None) -> np.ndarray:
    """``A[j, k]`` is False when some i < j meets both elimination conditions for k.

    Conditions: ``6 C(1) <= d[i,k] - 2 d[i,j]`` and neither j nor k lies in
    ``{l : 2 d[m,i] < d[m,l]}`` for any m < i. Processing order is index order.
    """
    n = dataset.n
    d = dataset.d
    policy = policy or ConfidencePolicy("hoeffding", delta, n)
    six_c1 = 6.0 * policy.radius(1)
    # skipped[i, l]: l is in the union over m < i of {l : 2 d[m,i] < d[m,l]}
    skipped = np.zeros((n, n), dtype=bool)
    for i in range(1, n):
        m = np.arange(i)
        skipped[i] = np.any(2.0 * d[m, i][:, None] < d[m, :], axis=0)
    A = np.ones((n, n), dtype=bool)
    for j in range(n):
        for i in range(j):
            if skipped[i, j]:
                continue
            elim = (six_c1 <= d[i] - 2.0 * d[i, j]) & ~skipped[i]
            A[j] &= ~elim
    np.fill_diagonal(A, False)
    return A


def predict_complexity(dataset: Dataset, delta: float, policy: ConfidencePolicy | None = None) -> dict:
    """Order-of-magnitude query totals, up to constants.

    ``triangle``: sum over j of ``1[A_jk] H_jk`` for k > j and
    ``1[A_jk] (H_jk - 1[A_kj] H_kj)_+`` for k < j. ``no_triangle``: sum over
    pairs of ``max(H_jk, H_kj)``.
    """
    n = dataset.n
    gaps = gap_profile(dataset).gaps
    H = np.zeros((n, n))
    for j in range(n):
        for k in range(n):
            if j != k:
                H[j, k] = complexity_term(n, delta, gaps[j, k])
    A = triangle_indicator(dataset, delta, policy) if n > 2 else ~np.eye(n, dtype=bool)
    tri = 0.0
    for j in range(n):
        for k in range(n):
            if k == j or not A[j, k]:
                continue
            if k > j:
                tri += H[j, k]
            else:
                tri += max(H[j, k] - (H[k, j] if A[k, j] else 0.0), 0.0)
    iu = np.triu_indices(n, 1)
    no_tri = float(np.maximum(H[iu], H.T[iu]).sum())
    return {"triangle": float(tri), "no_triangle": no_tri, "note": "up to constants"}


# -- sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    doc: dict

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        _validate(doc, "sweep.schema.json")
        full = {**SWEEP_DEFAULTS, **doc}
        full["policy"] = {"kind": "hoeffding", "epsilon": 0.7, "sigma": 1.0, **full["policy"]}
        if full["family"] == "sqrt_clusters":
            if "sizes" not in full:
                raise ConfigError("sqrt_clusters sweeps need 'sizes'")
            for n in full["sizes"]:
                if math.isqrt(n) ** 2 != n:
                    raise ConfigError(f"size {n} is not a perfect square")
        elif "levels" not in full:
            raise ConfigError("hierarchical sweeps need 'levels'")
        return cls(full)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(doc)

    def __getattr__(self, key):
        try:
            return self.doc[key]
        except KeyError:
            raise AttributeError(key) from None

    def policy(self, n: int) -> ConfidencePolicy:
        p = self.doc["policy"]
        return ConfidencePolicy(p["kind"], self.doc["delta"], n, p["epsilon"], p["sigma"])

    def points(self) -> list:
        return self.sizes if self.family == "sqrt_clusters" else self.levels


def sweep_dataset(cfg: SweepConfig, point: int, seed: int) -> Dataset:
    if cfg.family == "sqrt_clusters":
        side = math.isqrt(point)
        return generate_separated_clusters(side, side, cfg.margin, cfg.policy(point), seed=seed, g=cfg.gap)
    return generate_hierarchical(point, "auto", cfg.margin, cfg.policy(2), seed=seed, g=cfg.gap)


def run_sweep(cfg: SweepConfig, progress=None) -> dict:
    """Total queries per (size, algorithm, trial). Elimination learners run to
    completion; ``random`` reports the total at the first fully correct pass."""
    rows = []
    for point in cfg.points():
        for t in range(cfg.trials):
            seed = cfg.base_seed + t
            ds = sweep_dataset(cfg, point, seed)
            truth = np.array([min(s) for s in nn_sets(ds)])
            for alg in cfg.algorithms:
                oracle = GaussianOracle(ds, cfg.sigma, seed=seed)
                p = cfg.policy(ds.n)
                run_cfg = RunConfig(alg, cfg.delta, p.kind, p.epsilon, p.sigma, cfg.round_cap, seed)
                row = {"n": ds.n, "algorithm": alg, "trial": t}
                try:
                    if alg == "random":
                        rep = random_baseline(oracle, None, seed=seed, truth=truth)
                    else:
                        rep = run_algorithm(alg, oracle, run_cfg)
                    row.update(total_queries=int(rep.total_queries), correct=bool(np.array_equal(rep.nn, truth)))
                except NNGraphError as exc:
                    row.update(total_queries=None, correct=False, message=str(exc))
                rows.append(row)
            if progress is not None:
                progress(point, t)
    return {"rows": rows, "fits": sweep_fits(rows, cfg)}


def sweep_fits(rows: list[dict], cfg: SweepConfig) -> dict:
    fits = {}
    for alg in cfg.algorithms:
        sizes, totals = [], []
        for n in sorted({r["n"] for r in rows}):
            vals = [r["total_queries"] for r in rows if r["n"] == n and r["algorithm"] == alg
                    and r["total_queries"] is not None]
            if vals:
                sizes.append(n)
                totals.append(float(np.mean(vals)))
        if len(sizes) >= 3:
            fits[alg] = {
                "sizes": sizes,
                "mean_totals": totals,
                "power": scaling_fit(sizes, totals).to_json(),
                "nlogn": scaling_fit(sizes, totals, nlogn=True).to_json(),
            }
    return fits


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "algorithm", "trial", "total_queries", "correct"],
                       lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
