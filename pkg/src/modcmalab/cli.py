"""Command-line surface: run, single-module, tune, verify, report.

Exit codes: 0 ok, 2 invalid configuration (including malformed JSON),
3 unknown function, 4 missing input files.  Every command is idempotent
for identical inputs, seeds and --jobs values; outputs land under --out
and inputs are never modified.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .benchmarks import FUNCTION_IDS, make_instance
from .config import Configuration, ConfigurationError
from .core import run
from .experiments import (ExperimentManifest, function_of_elites_file,
                          initial_race_relative, load_elites, read_runlog,
                          save_elites, single_module_experiment,
                          tune_experiment, verify_elites)
from .metrics import aoc, default_targets, read_trace, write_trace
from .report import (activation_counts, distribution_divergence,
                     export_ecdf_ert, relative_improvement,
                     write_activation_csv, write_delta_csv, write_ecdf_csv,
                     write_ert_csv, write_improvement_csv,
                     write_initial_race_csv)

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_UNKNOWN_FUNCTION = 3
EXIT_MISSING_INPUT = 4

SEED_ENV_VAR = "MODCMA_SEED"


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_config(spec: str) -> Configuration:
    """Inline JSON (starts with '{') or a path to a JSON file."""
    text = spec
    if not spec.lstrip().startswith("{"):
        path = Path(spec)
        if not path.exists():
            raise ConfigurationError(f"configuration file not found: {spec}")
        text = path.read_text()
    return Configuration.from_json(text)


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
    except ConfigurationError as exc:
        return _fail(EXIT_BAD_CONFIG, str(exc))
    if args.function not in FUNCTION_IDS:
        return _fail(EXIT_UNKNOWN_FUNCTION, f"unknown function {args.function!r}")
    problem = make_instance(args.function, args.dim, args.iid)
    trace = run(cfg, problem, args.budget, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = f"trace_{args.function}_d{args.dim}_iid{args.iid}_seed{args.seed}.csv"
    write_trace(trace, out / name)
    score = aoc([trace], default_targets(), args.budget)
    print(f"aoc={float(score.aoc)!r}")
    return EXIT_OK


def cmd_single_module(args) -> int:
    single_module_experiment(
        dim=args.dim, budget=args.budget, n_runs=args.runs, out=args.out,
        functions=tuple(args.function) if args.function else FUNCTION_IDS,
        iid=args.iid, include_ssa_new=args.ssa_new,
        include_boundary_new=args.boundary_new, jobs=args.jobs)
    return EXIT_OK


def cmd_tune(args) -> int:
    manifest_path = Path(args.manifest)
    if not manifest_path.exists():
        return _fail(EXIT_MISSING_INPUT, f"manifest not found: {args.manifest}")
    try:
        manifest = ExperimentManifest.from_json(manifest_path)
    except (ValueError, TypeError) as exc:
        return _fail(EXIT_BAD_CONFIG, f"invalid manifest: {exc}")
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        manifest.tuner_seed = int(env_seed)
    tune_experiment(manifest, jobs=args.jobs)
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.elites)
    if not path.exists():
        return _fail(EXIT_MISSING_INPUT, f"elites file not found: {args.elites}")
    if args.function not in FUNCTION_IDS:
        return _fail(EXIT_UNKNOWN_FUNCTION, f"unknown function {args.function!r}")
    elites = load_elites(path)
    budget = args.budget if args.budget else 10_000 * args.dim
    verified = verify_elites(elites, args.function, args.dim, args.iid,
                             budget, n_runs=args.runs,
                             seed_base=args.seed_base, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_elites(verified, out / path.name)
    return EXIT_OK


def _load_elite_files(paths):
    loaded = {}
    for spec in paths:
        path = Path(spec)
        if not path.exists():
            raise FileNotFoundError(spec)
        loaded.setdefault(function_of_elites_file(path), []).extend(
            load_elites(path))
    return loaded


def _best_verified(elites):
    scored = [e for e in elites if e.verified_aoc]
    if not scored:
        raise ValueError("elites lack verified_aoc values; run verify first")
    return min(scored, key=lambda e: e.verified_mean)


def cmd_report(args) -> int:
    out = Path(args.out)
    try:
        if args.kind == "activation":
            per_function = {fid: activation_counts(elites) for fid, elites
                            in _load_elite_files(args.elites).items()}
            write_activation_csv(per_function, out / "activation.csv")
        elif args.kind == "improvement":
            base = _load_elite_files(args.baseline)
            ext = _load_elite_files(args.experiment)
            rows = {}
            for fid in sorted(set(base) & set(ext)):
                rows[fid] = relative_improvement(
                    _best_verified(ext[fid]).verified_mean,
                    _best_verified(base[fid]).verified_mean)
            write_improvement_csv(rows, out / "improvement.csv")
        elif args.kind == "delta":
            base = [e for elites in _load_elite_files(args.baseline).values()
                    for e in elites]
            ext = [e for elites in _load_elite_files(args.experiment).values()
                   for e in elites]
            write_delta_csv(distribution_divergence(ext, base),
                            out / "delta.csv")
        elif args.kind == "ecdf":
            if not args.traces or args.budget is None:
                return _fail(EXIT_MISSING_INPUT,
                             "ecdf report needs --traces and --budget")
            traces = [read_trace(p, budget=args.budget) for p in args.traces]
            ecdf_rows, ert_rows = export_ecdf_ert(traces, default_targets())
            write_ecdf_csv(ecdf_rows, out / "ecdf.csv")
            write_ert_csv(ert_rows, out / "ert.csv")
        elif args.kind == "initial":
            if args.runlog is None:
                return _fail(EXIT_MISSING_INPUT, "initial report needs --runlog")
            rows = initial_race_relative(read_runlog(args.runlog))
            write_initial_race_csv(rows, out / "initial.csv")
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING_INPUT, f"missing input: {exc}")
    except ValueError as exc:
        return _fail(EXIT_MISSING_INPUT, str(exc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modcmalab",
        description="Modular CMA-ES laboratory: runs, tuning and reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one optimization run")
    p.add_argument("--function", required=True)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--iid", type=int, default=1)
    p.add_argument("--config", required=True,
                   help="inline JSON or a path to a configuration file")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("single-module",
                       help="benchmark every single-module variant")
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--iid", type=int, default=1)
    p.add_argument("--function", action="append",
                   help="restrict to a function (repeatable)")
    p.add_argument("--ssa-new", action="store_true", dest="ssa_new")
    p.add_argument("--boundary-new", action="store_true", dest="boundary_new")
    p.add_argument("--out", default="results")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_single_module)

    p = sub.add_parser("tune", help="iterated-racing tuning from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("verify", help="fixed-seed validation runs for elites")
    p.add_argument("--elites", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--iid", type=int, default=1)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--runs", type=int, default=25)
    p.add_argument("--seed-base", type=int, default=1000, dest="seed_base")
    p.add_argument("--out", default="results")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="CSV summaries from stored results")
    p.add_argument("--kind", required=True,
                   choices=["activation", "improvement", "delta", "ecdf",
                            "initial"])
    p.add_argument("--elites", nargs="*", default=[])
    p.add_argument("--baseline", nargs="*", default=[])
    p.add_argument("--experiment", nargs="*", default=[])
    p.add_argument("--traces", nargs="*", default=[])
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--runlog", default=None)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "budget", None) is None and args.command == "run":
        args.budget = 10_000 * args.dim
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
