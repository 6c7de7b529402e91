"""Experiment pipelines shared by the CLI and the example scripts.

Workers here are module-level functions so that (configuration, seed) runs
can be dispatched to worker processes; results are merged in submission
order, keeping every pipeline deterministic for a fixed seed regardless of
the number of jobs.
"""

from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .benchmarks import FUNCTION_IDS, make_instance
from .config import Configuration
from .core import run
from .metrics import RunTrace, aoc_value, default_targets, write_scores
from .parallel import pmap
from .tuner import Elite, build_space, iterated_race, verify

RUNLOG_HEADER = ("iteration", "config_id", "seed", "aoc")


def run_trace(cfg: Configuration, seed: int, fid: str, dim: int, iid: int,
              budget: int) -> RunTrace:
    """One fresh-instance run; the worker unit for every pipeline."""
    problem = make_instance(fid, dim, iid)
    return run(cfg, problem, budget, seed)


def run_aoc(cfg: Configuration, seed: int, fid: str, dim: int, iid: int,
            budget: int) -> float:
    trace = run_trace(cfg, seed, fid, dim, iid, budget)
    return aoc_value([trace], default_targets(), budget)


def make_evaluator(fid: str, dim: int, iid: int, budget: int):
    """Picklable evaluator(config, seed) -> single-run AOC."""
    return functools.partial(run_aoc, fid=fid, dim=dim, iid=iid, budget=budget)


# ---------------------------------------------------------------------------
# manifest


@dataclass
class ExperimentManifest:
    """One pass of the assessment roadmap, serialized as a JSON object."""

    name: str
    out: str
    extension: str = "none"
    functions: tuple = FUNCTION_IDS
    dim: int = 5
    iid: int = 1
    run_budget: int | None = None        # default: 10000 * dim
    tuner_budget: int = 1000
    repetitions: int = 4
    tuner_seed: int = 1
    verify_runs: int = 25
    verify_seed_base: int = 1000

    def __post_init__(self):
        self.functions = tuple(self.functions)
        unknown = [f for f in self.functions if f not in FUNCTION_IDS]
        if unknown:
            raise ValueError(f"unknown functions in manifest: {unknown}")
        if self.run_budget is None:
            self.run_budget = 10_000 * self.dim
        if self.run_budget <= 0 or self.tuner_budget <= 0:
            raise ValueError("budgets must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @classmethod
    def from_json(cls, path) -> "ExperimentManifest":
        data = json.loads(Path(path).read_text())
        return cls(**data)


# ---------------------------------------------------------------------------
# elites and run-log files


def save_elites(elites: list[Elite], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = [{
        "config": e.config.to_dict(),
        "tuner_aoc": e.tuner_aoc,
        "verified_aoc": e.verified_aoc,
    } for e in elites]
    path.write_text(json.dumps(payload, indent=2) + "\n")


def load_elites(path) -> list[Elite]:
    data = json.loads(Path(path).read_text())
    elites = []
    for item in data:
        cfg = Configuration.from_dict(item["config"])
        elites.append(Elite(config=cfg, config_id=cfg.config_id(),
                            tuner_aoc=float(item["tuner_aoc"]),
                            n_tuning_runs=0,
                            verified_aoc=item.get("verified_aoc")))
    return elites


def write_runlog(rows, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(",".join(RUNLOG_HEADER) + "\n")
        for iteration, cid, seed, value in rows:
            fh.write(f"{iteration},{cid},{seed},{float(value)!r}\n")


def read_runlog(path):
    lines = Path(path).read_text().splitlines()
    if not lines or tuple(lines[0].split(",")) != RUNLOG_HEADER:
        raise ValueError(f"unexpected run-log header in {path}")
    rows = []
    for line in lines[1:]:
        iteration, cid, seed, value = line.split(",")
        rows.append((int(iteration), cid, int(seed), float(value)))
    return rows


def elites_filename(fid: str, rep: int) -> str:
    return f"elites_{fid}_rep{rep}.json"


def function_of_elites_file(path) -> str:
    """Function label encoded in an elites file name, else the stem."""
    stem = Path(path).stem
    match = re.fullmatch(r"elites_(.+)_rep\d+", stem)
    return match.group(1) if match else stem


# ---------------------------------------------------------------------------
# pipelines


def tune_experiment(manifest: ExperimentManifest, jobs: int = 1) -> list[Path]:
    """Run the tuner on every manifest function, repetitions times each.

    Writes elites_<fid>_rep<k>.json and runlog_<fid>_rep<k>.csv under the
    manifest output directory; returns the elites paths.
    """
    out = Path(manifest.out)
    space = build_space(manifest.extension)
    written = []
    for fid in manifest.functions:
        fid_index = FUNCTION_IDS.index(fid)
        evaluator = make_evaluator(fid, manifest.dim, manifest.iid,
                                   manifest.run_budget)
        for rep in range(1, manifest.repetitions + 1):
            rng = np.random.default_rng(
                np.random.SeedSequence([manifest.tuner_seed, fid_index, rep]))
            log: list = []
            elites = iterated_race(space, evaluator,
                                   total_budget=manifest.tuner_budget,
                                   rng=rng, failure_score=manifest.run_budget,
                                   log=log, jobs=jobs)
            elites_path = out / elites_filename(fid, rep)
            save_elites(elites, elites_path)
            write_runlog(log, out / f"runlog_{fid}_rep{rep}.csv")
            written.append(elites_path)
    return written


def verify_elites(elites: list[Elite], fid: str, dim: int, iid: int,
                  budget: int, n_runs: int = 25, seed_base: int = 1000,
                  jobs: int = 1) -> list[Elite]:
    evaluator = make_evaluator(fid, dim, iid, budget)
    return verify(elites, evaluator, n_runs=n_runs, seed_base=seed_base,
                  failure_score=budget, jobs=jobs)


def single_module_configurations(include_ssa_new: bool = False,
                                 include_boundary_new: bool = False):
    """("default", cfg) plus every single-module deviation from it.

    The baseline enumeration covers the original option table: the five
    flags, tpa, both mirroring modes, both quasi-random samplers, the
    half-power weights and both restart strategies; the new ssa/boundary
    options join only on request.
    """
    base = Configuration()
    items = [("default", base)]

    def add(module, value):
        items.append((f"{module}={value}", base.with_option(module, value)))

    for flag in ("active", "elitist", "orthogonal", "sequential",
                 "threshold_convergence"):
        items.append((f"{flag}=on", base.with_option(flag, True)))
    add("ssa", "tpa")
    add("mirrored", "mirrored")
    add("mirrored", "mirrored_pairwise")
    add("base_sampler", "sobol")
    add("base_sampler", "halton")
    add("weights", "half_power_lambda")
    add("restart", "ipop")
    add("restart", "bipop")
    if include_ssa_new:
        for option in ("msr", "psr", "xnes", "m-xnes", "p-xnes"):
            add("ssa", option)
    if include_boundary_new:
        for option in ("ur", "mcs", "cotn", "scs", "tcs"):
            add("bound_correction", option)
    return items


def single_module_experiment(dim: int, budget: int, n_runs: int, out,
                             functions=FUNCTION_IDS, iid: int = 1,
                             include_ssa_new: bool = False,
                             include_boundary_new: bool = False,
                             jobs: int = 1):
    """Benchmark the default against every single-module variant.

    All variants share the run seeds 0..n_runs-1.  Returns
    {function: {label: aoc}} and writes scores.csv + vbs.csv under out.
    """
    from .report import vbs_single_module

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    configs = single_module_configurations(include_ssa_new, include_boundary_new)
    targets = default_targets()
    results: dict = {}
    score_rows = []
    for fid in functions:
        results[fid] = {}
        for label, cfg in configs:
            tasks = [(cfg, seed, fid, dim, iid, budget)
                     for seed in range(n_runs)]
            traces = pmap(run_trace, tasks, jobs=jobs)
            value = aoc_value(traces, targets, budget)
            results[fid][label] = value
            score_rows.append((cfg.config_id(), fid, iid, n_runs, budget, value))
    write_scores(score_rows, out / "scores.csv")
    rows = vbs_single_module(results)
    with (out / "vbs.csv").open("w", newline="") as fh:
        fh.write("function,vbs,aoc_vbs,aoc_default,improvement\n")
        for row in rows:
            fh.write(f"{row['function']},{row['vbs']},{row['aoc_vbs']!r},"
                     f"{row['aoc_default']!r},{row['improvement']!r}\n")
    return results


def initial_race_relative(runlog_rows) -> list[tuple[str, float | None]]:
    """Per-config AOC of the first race relative to the default config.

    Positive values mean lower (better) AOC than the default, mirroring
    the "relative to default" reading of the initial-race distribution.
    """
    default_id = Configuration().config_id()
    by_config: dict[str, list[float]] = {}
    for iteration, cid, _seed, value in runlog_rows:
        if iteration == 1:
            by_config.setdefault(cid, []).append(value)
    if default_id not in by_config:
        raise ValueError("run log has no iteration-1 rows for the default "
                         "configuration")
    default_mean = float(np.mean(by_config[default_id]))
    rows = []
    for cid in by_config:
        mean = float(np.mean(by_config[cid]))
        rel = None if default_mean == 0.0 else 1.0 - mean / default_mean
        rows.append((cid, rel))
    return rows
