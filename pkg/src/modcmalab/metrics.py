"""Fixed-target anytime performance: hitting times, ECDF, AUC and AOC.

A run is summarized by its monotone best-so-far trace.  Performance of a
set of runs is the area over the empirical CDF of hitting times across the
51-value target set, AOC = budget - AUC (lower is better).  AUC discretizes
the time integral as the unit-width step sum over t = 1..budget, computed
exactly in rational arithmetic via the sorted hitting-time decomposition.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

FINAL_TARGET = 1e-8
N_TARGETS = 51


@dataclass
class RunTrace:
    """Best-so-far precision improvements of one run, keyed by evaluation count."""

    improvements: list[tuple[int, float]]
    budget: int
    config_id: str = ""
    fid: str = ""
    iid: int = 0
    seed: int = 0

    def __post_init__(self):
        last_e, last_p = 0, math.inf
        for evals, prec in self.improvements:
            if evals < 1 or evals > self.budget:
                raise ValueError("improvement outside [1, budget]")
            if evals <= last_e or prec >= last_p:
                raise ValueError("trace must be strictly improving")
            last_e, last_p = evals, prec

    @property
    def final_precision(self) -> float:
        return self.improvements[-1][1] if self.improvements else math.inf


@dataclass(frozen=True)
class TargetSet:
    """Descending precision targets shared by every performance measurement."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.size < 1 or (np.diff(values) >= 0).any():
            raise ValueError("targets must be strictly descending")

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values)


def default_targets() -> TargetSet:
    """51 targets 10^2 down to 10^-8, consecutive ratio 10^(1/5)."""
    return TargetSet(10.0 ** (2.0 - np.arange(N_TARGETS) / 5.0))


@dataclass
class AocScore:
    """Area over the ECDF curve, kept exact so aoc + auc == budget holds."""

    aoc: Fraction
    auc: Fraction
    budget: int
    n_runs: int

    def __float__(self):
        return float(self.aoc)


def hitting_time(trace: RunTrace, v: float):
    """Smallest evaluation count reaching precision <= v, else math.inf."""
    for evals, prec in trace.improvements:
        if prec <= v:
            return evals
    return math.inf


def _hit_matrix(traces, targets: TargetSet) -> list[list[float]]:
    return [[hitting_time(tr, v) for v in targets] for tr in traces]


def ecdf(traces, targets: TargetSet, t: int) -> float:
    """Fraction of (run, target) pairs hit within t evaluations."""
    if not traces:
        raise ValueError("need at least one trace")
    hits = sum(1 for row in _hit_matrix(traces, targets) for h in row if h <= t)
    return float(Fraction(hits, len(traces) * len(targets)))


def aoc(traces, targets: TargetSet, budget: int) -> AocScore:
    """Exact AOC/AUC over a set of runs sharing one budget.

    Each (run, target) pair hit at time h <= budget contributes B - h + 1
    unit steps to the area under the curve; unreached pairs contribute 0.
    """
    if not traces:
        raise ValueError("need at least one trace")
    for tr in traces:
        if tr.budget != budget:
            raise ValueError("all traces must share the budget")
    n, m = len(traces), len(targets)
    steps = sum(budget - h + 1 for row in _hit_matrix(traces, targets)
                for h in row if h <= budget)
    auc = Fraction(int(steps), n * m)
    return AocScore(aoc=Fraction(budget) - auc, auc=auc, budget=budget, n_runs=n)


def aoc_value(traces, targets: TargetSet, budget: int) -> float:
    return float(aoc(traces, targets, budget).aoc)


TRACE_HEADER = ("evals", "best_precision")
SCORE_HEADER = ("config_id", "fid", "iid", "n_runs", "budget", "aoc")


def write_trace(trace: RunTrace, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for evals, prec in trace.improvements:
            writer.writerow([evals, repr(prec)])


def read_trace(path, budget: int, **meta) -> RunTrace:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        improvements = [(int(e), float(p)) for e, p in reader]
    return RunTrace(improvements=improvements, budget=budget, **meta)


def write_scores(rows, path) -> None:
    """Rows of (config_id, fid, iid, n_runs, budget, aoc)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_HEADER)
        for config_id, fid, iid, n_runs, budget, value in rows:
            writer.writerow([config_id, fid, iid, n_runs, budget, repr(float(value))])
