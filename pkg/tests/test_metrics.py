import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modcmalab.metrics import (RunTrace, TargetSet, aoc, default_targets,
                               ecdf, hitting_time, read_trace, write_trace)


def test_default_targets_shape():
    targets = default_targets()
    assert len(targets) == 51
    assert targets.values[0] == 100.0
    assert targets.values[-1] == pytest.approx(1e-8, rel=1e-12)
    ratios = targets.values[:-1] / targets.values[1:]
    assert np.abs(ratios - 10.0 ** 0.2).max() <= 1e-12 * 10.0 ** 0.2


def test_trace_validation():
    RunTrace([(10, 5.0), (20, 0.5)], budget=100)
    with pytest.raises(ValueError):
        RunTrace([(20, 5.0), (10, 0.5)], budget=100)   # evals not increasing
    with pytest.raises(ValueError):
        RunTrace([(10, 0.5), (20, 5.0)], budget=100)   # precision not decreasing
    with pytest.raises(ValueError):
        RunTrace([(101, 5.0)], budget=100)


def test_hitting_time_examples():
    trace = RunTrace([(10, 5.0), (20, 0.5)], budget=100)
    assert hitting_time(trace, 1.0) == 20
    assert hitting_time(trace, 10.0) == 10
    assert hitting_time(trace, 0.1) == math.inf


def test_ecdf_examples():
    targets = TargetSet(np.array([10.0, 1.0]))
    hit_all = RunTrace([(1, 0.5)], budget=100)
    assert ecdf([hit_all], targets, 1) == 1.0
    hit_none = RunTrace([(1, 50.0)], budget=100)
    assert ecdf([hit_none], targets, 100) == 0.0
    one_of_two = RunTrace([(3, 5.0)], budget=100)
    assert ecdf([one_of_two, hit_all], targets, 50) == 0.75


def test_aoc_extremes():
    targets = default_targets()
    perfect = RunTrace([(1, 1e-9)], budget=200)
    score = aoc([perfect], targets, 200)
    assert score.aoc == 0 and score.auc == 200
    hopeless = RunTrace([(1, 1e9)], budget=200)
    score = aoc([hopeless], targets, 200)
    assert score.aoc == 200 and score.auc == 0


def test_aoc_single_hit_closed_form():
    targets = TargetSet(np.array([1.0]))
    for h in (1, 7, 200):
        trace = RunTrace([(h, 0.5)], budget=200)
        assert aoc([trace], targets, 200).aoc == h - 1


def _aoc_brute_force(traces, targets, budget):
    n, m = len(traces), len(targets)
    auc = Fraction(0)
    for t in range(1, budget + 1):
        hits = sum(1 for tr in traces for v in targets
                   if hitting_time(tr, v) <= t)
        auc += Fraction(hits, n * m)
    return budget - auc, auc


def _random_traces(rng, n_traces, budget):
    traces = []
    for _ in range(n_traces):
        n_imp = rng.integers(1, 6)
        evals = np.sort(rng.choice(np.arange(1, budget + 1),
                                   size=n_imp, replace=False))
        precisions = np.sort(10.0 ** rng.uniform(-9, 3, size=n_imp))[::-1]
        traces.append(RunTrace(list(zip(map(int, evals), precisions)),
                               budget=budget))
    return traces


def test_aoc_identity_and_brute_force_oracle():
    rng = np.random.default_rng(42)
    targets = default_targets()
    for _ in range(100):
        budget = int(rng.integers(5, 120))
        traces = _random_traces(rng, int(rng.integers(1, 4)), budget)
        score = aoc(traces, targets, budget)
        assert score.aoc + score.auc == budget          # exact, by rationals
        bf_aoc, bf_auc = _aoc_brute_force(traces, targets, budget)
        assert bf_aoc == score.aoc and bf_auc == score.auc
        assert 0 <= score.aoc <= budget


@given(st.integers(min_value=1, max_value=50), st.integers(min_value=1, max_value=50))
@settings(max_examples=60, deadline=None)
def test_aoc_monotone_in_extra_hits(h, budget):
    if h > budget:
        h, budget = budget, h
    targets = TargetSet(np.array([10.0, 1.0]))
    weaker = RunTrace([(h, 5.0)], budget=budget)
    stronger = RunTrace([(h, 0.5)], budget=budget)
    assert aoc([stronger], targets, budget).aoc <= aoc([weaker], targets, budget).aoc


def test_aoc_requires_shared_budget():
    targets = default_targets()
    with pytest.raises(ValueError):
        aoc([RunTrace([(1, 1.0)], budget=10),
             RunTrace([(1, 1.0)], budget=20)], targets, 10)
    with pytest.raises(ValueError):
        ecdf([], targets, 1)


def test_trace_csv_roundtrip(tmp_path):
    trace = RunTrace([(3, 12.5), (17, 0.25), (90, 1e-7)], budget=100,
                     config_id="abc", fid="sphere", iid=1, seed=4)
    path = tmp_path / "trace.csv"
    write_trace(trace, path)
    assert path.read_text().splitlines()[0] == "evals,best_precision"
    back = read_trace(path, budget=100)
    assert back.improvements == trace.improvements
