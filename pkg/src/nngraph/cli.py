"""Command line entry point: generate, run, sweep, analyze, validate.

Exit codes: 0 success, 1 configuration or input error, 2 learner failures
beyond the failure budget (``run``) or failed checks (``validate``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, harness
from .bounds import ConfidencePolicy
from .errors import ConfigError, DomainError, GenerationError
from .generators import check_cluster_condition
from .metric import Dataset, is_metric, quasi_metric_constant, triangle_violation

log = logging.getLogger("nngraph")

EXIT_OK, EXIT_CONFIG, EXIT_FAILURES = 0, 1, 2


def _param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _policy_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--policy", choices=["hoeffding", "lil"], default="hoeffding")
    p.add_argument("--epsilon", type=float, default=0.7)
    p.add_argument("--policy-sigma", type=float, default=1.0)


def _policy(args, n: int) -> ConfidencePolicy:
    return ConfidencePolicy(args.policy, args.delta, n, args.epsilon, args.policy_sigma)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nngraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nngraph {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated dataset to a JSON file")
    g.add_argument("generator", choices=["circle_clusters", "circulant", "separated_clusters", "hierarchical"])
    g.add_argument("params", nargs="*", type=_param, help="generator parameters as key=value")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    _policy_args(g)

    r = sub.add_parser("run", help="run an experiment config and write its result bundle")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="result directory (NNGRAPH_OUTPUT_DIR overrides)")
    r.add_argument("--no-plots", action="store_true")

    s = sub.add_parser("sweep", help="total queries over a size grid plus scaling fits")
    s.add_argument("config")
    s.add_argument("-o", "--output", help="result directory (NNGRAPH_OUTPUT_DIR overrides)")
    s.add_argument("--no-plots", action="store_true")

    a = sub.add_parser("analyze", help="re-aggregate a run or sweep directory")
    a.add_argument("directory")
    a.add_argument("--no-plots", action="store_true")

    v = sub.add_parser("validate", help="metric, quasi-metric and cluster checks on a dataset file")
    v.add_argument("dataset")
    _policy_args(v)
    return parser


def cmd_generate(args) -> int:
    params = dict(args.params)
    spec = {"generator": args.generator, "params": params}
    ds = harness.build_dataset(spec, lambda n: _policy(args, n), args.seed)
    ds.save(args.output)
    print(f"wrote {args.generator} dataset with n={ds.n} to {args.output}")
    return EXIT_OK


def _progress(done: int, total: int) -> None:
    log.info("trial %d/%d", done, total)


def cmd_run(args) -> int:
    cfg = harness.ExperimentConfig.load(args.config)
    out = harness.output_dir(args.output)
    result = harness.run_experiment(cfg, out, progress=_progress)
    if out is not None and not args.no_plots:
        from .plotting import error_curves

        error_curves(result.traces, out / "error_curves.png", title=cfg.name)
    sys.stdout.write(harness.traces_csv(result.traces))
    for alg, s in result.summary.items():
        print(f"# {alg}: failed={s['failed']} wrong_graph={s['wrong_graph']} "
              f"budget={s['failure_budget']:.2f} over_budget={s['over_budget']}")
    return result.exit_code


def cmd_sweep(args) -> int:
    cfg = harness.SweepConfig.load(args.config)
    out = harness.output_dir(args.output)
    result = harness.run_sweep(cfg, progress=lambda p, t: log.info("size %s trial %d", p, t))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(harness.sweep_csv(result["rows"]))
        (out / "fits.json").write_text(json.dumps(result["fits"], indent=2, sort_keys=True) + "\n")
        (out / "manifest.json").write_text(
            json.dumps(harness.manifest(cfg.doc, "sweep"), indent=2, sort_keys=True) + "\n")
        if not args.no_plots and result["fits"]:
            from .plotting import scaling_plot

            scaling_plot(result["fits"], out / "scaling.png", title=cfg.name)
    sys.stdout.write(harness.sweep_csv(result["rows"]))
    _print_fits(result["fits"])
    return EXIT_OK


def _print_fits(fits: dict) -> None:
    for alg, fit in fits.items():
        p, q = fit["power"], fit["nlogn"]
        print(f"# {alg}: slope {p['slope']:.3f} [{p['lo95']:.3f}, {p['hi95']:.3f}]  "
              f"n log n slope {q['slope']:.3f} [{q['lo95']:.3f}, {q['hi95']:.3f}]")


def cmd_analyze(args) -> int:
    d = Path(args.directory)
    manifest_path = d / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"{d} has no manifest.json")
    kind = json.loads(manifest_path.read_text()).get("kind", "experiment")
    if kind == "sweep":
        cfg = harness.SweepConfig.from_dict(json.loads(manifest_path.read_text())["config"])
        rows = _read_sweep_csv(d / "sweep.csv")
        fits = harness.sweep_fits(rows, cfg)
        (d / "fits.json").write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
        if not args.no_plots and fits:
            from .plotting import scaling_plot

            scaling_plot(fits, d / "scaling.png", title=cfg.name)
        _print_fits(fits)
        return EXIT_OK
    cfg, records = harness.load_bundle(d)
    rows = harness.aggregate(records, cfg.budgets, cfg.algorithms)
    (d / "traces.csv").write_text(harness.traces_csv(rows))
    if not args.no_plots:
        from .plotting import error_curves

        error_curves(rows, d / "error_curves.png", title=cfg.name)
    sys.stdout.write(harness.traces_csv(rows))
    return EXIT_OK


def _read_sweep_csv(path: Path) -> list[dict]:
    import csv

    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append({"n": int(r["n"]), "algorithm": r["algorithm"], "trial": int(r["trial"]),
                         "total_queries": int(r["total_queries"]) if r["total_queries"] else None,
                         "correct": r["correct"] == "True"})
    return rows


def cmd_validate(args) -> int:
    doc = json.loads(Path(args.dataset).read_text())
    doc["metric"] = False
    ds = Dataset.from_json(doc)
    ok = True
    metric = is_metric(ds.d)
    print(f"n: {ds.n}")
    print(f"metric: {'pass' if metric else 'fail'} (max violation {triangle_violation(ds.d):.6g})")
    if ds.n >= 3:
        try:
            print(f"quasi-metric constant: {quasi_metric_constant(ds):.6g}")
        except DomainError as exc:
            print(f"quasi-metric constant: undefined ({exc})")
            ok = False
    ok &= metric
    if ds.labels is not None:
        checks = check_cluster_condition(ds, ds.labels, _policy(args, ds.n))
        bad = [c for c in checks if not c.passed]
        print(f"cluster condition: {'pass' if not bad else 'fail'} ({len(checks) - len(bad)}/{len(checks)} clusters)")
        for c in bad[:5]:
            print(f"  cluster {c.label}: witness (i, j, k) = {c.witness}")
        ok &= not bad
    return EXIT_OK if ok else EXIT_FAILURES


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "sweep": cmd_sweep, "analyze": cmd_analyze,
            "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except KeyError as exc:
        print(f"error: missing field {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DomainError, GenerationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
