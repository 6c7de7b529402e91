"""Post-processing of stored results into flat CSV summaries.

Everything here is a pure function of already-collected scores, elites and
traces; re-running a report never re-runs an algorithm.  Option labels use
the "module=option" form, e.g. "ssa=psr" or "elitist=on".
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import FLAG_MODULES, MODULE_OPTIONS
from .metrics import TargetSet, ecdf, hitting_time

CATEGORICAL_MODULES = tuple(MODULE_OPTIONS)


def option_label(module: str, value) -> str:
    if module in FLAG_MODULES:
        value = "on" if value else "off"
    return f"{module}={value}"


def vbs_single_module(results: dict) -> list[dict]:
    """Best single-module option per function, against the default.

    ``results`` maps function -> {option_label: aoc}, where the label
    "default" must be present.  Improvement is 1 - aoc_best/aoc_default.
    """
    rows = []
    for function in results:
        table = results[function]
        if "default" not in table:
            raise ValueError(f"missing default row for {function}")
        best_option = min(table, key=lambda k: (table[k], k))
        aoc_best = float(table[best_option])
        aoc_default = float(table["default"])
        improvement = 1.0 - aoc_best / aoc_default if aoc_default != 0.0 else 0.0
        rows.append({
            "function": function, "vbs": best_option, "aoc_vbs": aoc_best,
            "aoc_default": aoc_default, "improvement": improvement,
        })
    return rows


def _configs_of(elites) -> list:
    configs = []
    for elite in elites:
        configs.append(elite.config if hasattr(elite, "config") else elite)
    return configs


def activation_counts(elites) -> dict:
    """module -> {option value: count} over an elite set."""
    configs = _configs_of(elites)
    if not configs:
        raise ValueError("empty elite set")
    counts: dict = {m: {} for m in CATEGORICAL_MODULES}
    for cfg in configs:
        for module in CATEGORICAL_MODULES:
            value = getattr(cfg, module)
            counts[module][value] = counts[module].get(value, 0) + 1
    return counts


def relative_improvement(aoc_ext: float, aoc_base: float) -> float | None:
    """1 - aoc_ext/aoc_base; positive when the extension is better.

    Undefined (None) when the baseline AOC is zero.
    """
    if aoc_base == 0.0:
        return None
    return 1.0 - aoc_ext / aoc_base


@dataclass
class DeltaSummary:
    """Per-module activation differences between two elite sets."""

    binary_delta: dict      # flag module -> fraction_on(a) - fraction_on(b)
    tv_distance: dict       # multi-option module -> total variation in [0, 1]


def distribution_divergence(elites_a, elites_b) -> DeltaSummary:
    """Module-usage difference of elite set a (experiment) vs b (baseline)."""
    counts_a, counts_b = activation_counts(elites_a), activation_counts(elites_b)
    n_a = len(_configs_of(elites_a))
    n_b = len(_configs_of(elites_b))
    binary, tv = {}, {}
    for module in CATEGORICAL_MODULES:
        options = MODULE_OPTIONS[module]
        if module in FLAG_MODULES:
            binary[module] = counts_a[module].get(True, 0) / n_a \
                - counts_b[module].get(True, 0) / n_b
        else:
            p = np.array([counts_a[module].get(o, 0) / n_a for o in options])
            q = np.array([counts_b[module].get(o, 0) / n_b for o in options])
            tv[module] = 0.5 * float(np.abs(p - q).sum())
    return DeltaSummary(binary_delta=binary, tv_distance=tv)


def ert(traces, v: float) -> float:
    """Expected running time to one target: evals spent per hitting run."""
    total, hits = 0, 0
    for trace in traces:
        h = hitting_time(trace, v)
        if h <= trace.budget:
            total += h
            hits += 1
        else:
            total += trace.budget
    return total / hits if hits else math.inf


def evaluation_grid(budget: int, n_points: int = 101) -> list[int]:
    """Strictly increasing log-spaced evaluation counts in [1, budget]."""
    raw = np.unique(np.round(np.logspace(0.0, math.log10(budget),
                                         n_points)).astype(int))
    return [int(t) for t in raw if 1 <= t <= budget]


def export_ecdf_ert(traces, targets: TargetSet):
    """(ecdf rows, ert rows) ready for CSV export.

    ECDF is sampled on a log-spaced grid via the same kernel as the scalar
    metric; ERT is per target, math.inf when no run hits.
    """
    if not traces:
        raise ValueError("no traces given")
    budget = traces[0].budget
    ecdf_rows = [(t, ecdf(traces, targets, t)) for t in evaluation_grid(budget)]
    ert_rows = [(v, ert(traces, v)) for v in targets]
    return ecdf_rows, ert_rows


# ---------------------------------------------------------------------------
# CSV writers (fixed headers)


def _write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def write_activation_csv(per_function_counts: dict, path) -> None:
    """per_function_counts: function -> activation_counts() result."""
    rows = []
    for function in per_function_counts:
        counts = per_function_counts[function]
        for module in counts:
            for value, count in counts[module].items():
                rows.append((function, option_label(module, value), count))
    _write_csv(path, ("function", "option", "count"), rows)


def write_improvement_csv(per_function: dict, path) -> None:
    rows = [(function, _fmt(value)) for function, value in per_function.items()]
    _write_csv(path, ("function", "improvement"), rows)


def write_delta_csv(summary: DeltaSummary, path) -> None:
    rows = [(module, _fmt(delta))
            for module, delta in summary.binary_delta.items()]
    rows += [(module, _fmt(tv)) for module, tv in summary.tv_distance.items()]
    _write_csv(path, ("module", "delta"), rows)


def write_ert_csv(ert_rows, path) -> None:
    _write_csv(path, ("target", "ert"),
               [(_fmt(float(v)), _fmt(float(e))) for v, e in ert_rows])


def write_ecdf_csv(ecdf_rows, path) -> None:
    _write_csv(path, ("evals", "ecdf"),
               [(t, _fmt(float(p))) for t, p in ecdf_rows])


def write_initial_race_csv(rows, path) -> None:
    """Rows of (config_id, relative_aoc) for the initial-race report."""
    _write_csv(path, ("config_id", "relative_aoc"),
               [(cid, _fmt(value)) for cid, value in rows])
