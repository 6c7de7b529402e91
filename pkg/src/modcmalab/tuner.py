"""Iterated racing over the module + hyperparameter space.

Configurations race on shared seed blocks (a paired design); once every
alive configuration has enough scores, a Friedman rank test decides whether
to eliminate the ones whose rank sums fall behind the leader by more than
the Conover critical difference (a one-sided sign test replaces Friedman
for two survivors).  Iterations resample around the surviving elites with
tightening categorical stickiness and shrinking continuous spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats as sps

from .config import (CONTINUOUS_BOUNDS, MODULE_OPTIONS, Configuration,
                     ConfigurationError)
from .parallel import pmap

DEFAULT_TUNER_BUDGET = 1000
MAX_ELITES = 5
MIN_RESULTS = 5
ALPHA = 0.05

# neighbourhood sampling schedule
P_STICK_START = 0.5
P_STICK_END = 0.9
CONT_SD_START = 0.25    # fraction of the parameter range
CONT_SD_SHRINK = 0.6


@dataclass(frozen=True)
class SearchSpace:
    """Tunable dimensions: categorical module options plus learning rates."""

    categorical: tuple          # ((name, options), ...)
    continuous: tuple           # ((name, lo, hi, lo_open), ...)
    extension: str = "none"

    @property
    def active_categorical(self):
        return tuple((n, o) for n, o in self.categorical if len(o) > 1)

    @property
    def n_dims(self) -> int:
        return len(self.active_categorical) + len(self.continuous)


def build_space(extension: str = "none") -> SearchSpace:
    """Baseline space, or one extended with the new ssa/boundary options.

    The two extensions are mutually exclusive: each experiment assesses one
    group of new options against the same baseline.
    """
    if extension not in ("none", "ssa_new", "boundary_new"):
        raise ConfigurationError(
            f"unknown extension {extension!r}; ssa_new and boundary_new are "
            "mutually exclusive and cannot be combined")
    categorical = []
    for name, options in MODULE_OPTIONS.items():
        if name == "ssa":
            options = options if extension == "ssa_new" else ("csa", "tpa")
        elif name == "bound_correction":
            options = options if extension == "boundary_new" else ("none",)
        categorical.append((name, tuple(options)))
    continuous = tuple((name,) + bounds for name, bounds in CONTINUOUS_BOUNDS.items())
    return SearchSpace(categorical=tuple(categorical), continuous=continuous,
                       extension=extension)


def _sample_continuous(lo: float, hi: float, lo_open: bool,
                       rng: np.random.Generator) -> float:
    u = rng.random()
    return hi - u * (hi - lo) if lo_open else lo + u * (hi - lo)


def sample_random(space: SearchSpace, rng: np.random.Generator) -> Configuration:
    values = {}
    for name, options in space.categorical:
        values[name] = options[rng.integers(len(options))]
    for name, lo, hi, lo_open in space.continuous:
        values[name] = _sample_continuous(lo, hi, lo_open, rng)
    return Configuration(**values)


def sample_near(space: SearchSpace, parent: Configuration,
                rng: np.random.Generator, p_stick: float,
                sd_frac: float) -> Configuration:
    """A neighbour of ``parent``: sticky categoricals, truncated-normal rates."""
    values = {}
    for name, options in space.categorical:
        keep = rng.random() < p_stick
        values[name] = getattr(parent, name) if keep and len(options) > 1 \
            else options[rng.integers(len(options))]
    for name, lo, hi, lo_open in space.continuous:
        center = getattr(parent, name)
        if center is None:
            values[name] = _sample_continuous(lo, hi, lo_open, rng)
            continue
        sd = sd_frac * (hi - lo)
        for _ in range(100):
            x = center + sd * rng.standard_normal()
            if (lo < x <= hi) if lo_open else (lo <= x <= hi):
                break
        else:
            x = _sample_continuous(lo, hi, lo_open, rng)
        values[name] = float(x)
    return Configuration(**values)


def initial_population(space: SearchSpace, n: int,
                       rng: np.random.Generator) -> list[Configuration]:
    """The exact default configuration plus n-1 uniform random ones."""
    if n < 2:
        raise ValueError("initial population needs n >= 2")
    return [Configuration()] + [sample_random(space, rng) for _ in range(n - 1)]


# ---------------------------------------------------------------------------
# statistical elimination


def _sign_test_eliminate(scores: np.ndarray, alpha: float) -> list[int]:
    """One-sided paired sign test for exactly two configurations."""
    a, b = scores[:, 0], scores[:, 1]
    better = int(np.sum(a < b))
    worse = int(np.sum(a > b))
    n_eff = better + worse
    if n_eff == 0:
        return []
    wins_best, loser = (better, 1) if better >= worse else (worse, 0)
    p = float(sps.binom.sf(wins_best - 1, n_eff, 0.5))
    return [loser] if p < alpha else []


def friedman_eliminate(scores: np.ndarray, alpha: float = ALPHA) -> list[int]:
    """Column indices to eliminate from a (blocks x configs) score matrix.

    Friedman with tie correction; on rejection, the Conover post-hoc rule
    drops every configuration whose rank sum exceeds the best one's by more
    than the critical difference.  The best column is never eliminated.
    """
    scores = np.asarray(scores, dtype=float)
    n, k = scores.shape
    if k < 2 or n < 2:
        return []
    if k == 2:
        return _sign_test_eliminate(scores, alpha)
    ranks = np.apply_along_axis(sps.rankdata, 1, scores)
    rank_sums = ranks.sum(axis=0)
    tie_term = 0.0
    for row in ranks:
        _, counts = np.unique(row, return_counts=True)
        tie_term += float((counts.astype(float) ** 3 - counts).sum())
    denom = n * k * (k + 1) - tie_term / (k - 1)
    if denom <= 0.0:
        return []  # all blocks fully tied: no evidence
    statistic = 12.0 * float(((rank_sums - n * (k + 1) / 2.0) ** 2).sum()) / denom
    p = float(sps.chi2.sf(statistic, k - 1))
    if not math.isfinite(p) or p >= alpha:
        return []
    a_sq = float((ranks ** 2).sum())
    df = (n - 1) * (k - 1)
    spread = 2.0 * (n * a_sq - float((rank_sums ** 2).sum())) / df
    crit = float(sps.t.ppf(1.0 - alpha / 2.0, df)) * math.sqrt(max(0.0, spread))
    best = int(np.argmin(rank_sums))
    return [j for j in range(k) if j != best and rank_sums[j] - rank_sums[best] > crit]


# ---------------------------------------------------------------------------
# races


@dataclass
class Entry:
    """One configuration's life inside a tuner run."""

    config: Configuration
    order: int
    scores: dict = field(default_factory=dict)    # seed -> aoc, full history

    @property
    def cid(self) -> str:
        return self.config.config_id()

    @property
    def mean_score(self) -> float:
        return float(np.mean(list(self.scores.values())))


def _evaluate_block(entries, evaluator, seed: int, failure_score: float,
                    jobs: int) -> list[float]:
    def safe(cfg, s):
        try:
            return float(evaluator(cfg, s))
        except Exception:
            return float(failure_score)

    if jobs <= 1:
        return [safe(e.config, seed) for e in entries]
    results = pmap(evaluator, [(e.config, seed) for e in entries], jobs=jobs,
                   on_error=float(failure_score))
    return [float(r) for r in results]


def race(entries, evaluator, next_seed, budget: int,
         min_results: int = MIN_RESULTS, alpha: float = ALPHA,
         n_elite: int = MAX_ELITES, failure_score: float = math.inf,
         log: list | None = None, iteration: int = 0, jobs: int = 1):
    """Race ``entries`` on shared seed blocks; returns (alive, evals_used).

    Every alive configuration is evaluated on the same seeds (paired
    design).  Statistical elimination starts once each has min_results
    scores; the race ends when at most n_elite survive or the budget
    cannot afford another full block.  An evaluator failure scores the
    worst case instead of aborting the race.
    """
    alive = list(entries)
    used = 0
    race_scores: dict[int, list[float]] = {id(e): [] for e in alive}
    n_blocks = 0
    while used + len(alive) <= budget:
        seed = next_seed()
        values = _evaluate_block(alive, evaluator, seed, failure_score, jobs)
        used += len(alive)
        n_blocks += 1
        for entry, value in zip(alive, values):
            entry.scores[seed] = value
            race_scores[id(entry)].append(value)
            if log is not None:
                log.append((iteration, entry.cid, seed, value))
        if n_blocks >= min_results:
            matrix = np.array([race_scores[id(e)] for e in alive]).T
            drop = friedman_eliminate(matrix, alpha)
            if drop:
                alive = [e for j, e in enumerate(alive) if j not in set(drop)]
                # enough discarded to move on; without eliminations the race
                # keeps collecting paired results until its budget runs out
                if len(alive) <= n_elite:
                    break
    return alive, used


def _select_elites(entries, n_elite: int):
    return sorted(entries, key=lambda e: (e.mean_score, e.order))[:n_elite]


@dataclass
class Elite:
    """A surviving configuration with its tuning and verification scores."""

    config: Configuration
    config_id: str
    tuner_aoc: float
    n_tuning_runs: int
    verified_aoc: list | None = None

    @property
    def verified_mean(self) -> float:
        if not self.verified_aoc:
            return math.nan
        return float(np.mean(self.verified_aoc))


def iterated_race(space: SearchSpace, evaluator,
                  total_budget: int = DEFAULT_TUNER_BUDGET,
                  rng: np.random.Generator | None = None,
                  n_elite: int = MAX_ELITES, min_results: int = MIN_RESULTS,
                  alpha: float = ALPHA, failure_score: float = math.inf,
                  log: list | None = None, jobs: int = 1) -> list[Elite]:
    """Full tuning run: 2 + floor(log2(#dims)) races sharing the budget.

    Iteration 1 races the default plus random configurations; later
    iterations carry the elites and sample around them.  The evaluator is
    called at most ``total_budget`` times.
    """
    if total_budget < 50:
        raise ValueError("tuner budget must be at least 50")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n_iter = 2 + int(math.floor(math.log2(space.n_dims)))
    seed_counter = iter(range(10 ** 9))
    next_seed = lambda: next(seed_counter)

    used_total = 0
    elites: list[Entry] = []
    order = 0
    for it in range(1, n_iter + 1):
        share = (total_budget - used_total) // (n_iter - it + 1)
        n_cfg = max(n_elite + 1, share // max(min_results, it + 4))
        n_cfg = min(n_cfg, share // min_results)
        if n_cfg < 2:
            continue
        if it == 1:
            entries = []
            for cfg in initial_population(space, n_cfg, rng):
                entries.append(Entry(config=cfg, order=order))
                order += 1
        else:
            frac = (it - 2) / max(1, n_iter - 2)
            p_stick = P_STICK_START + (P_STICK_END - P_STICK_START) * frac
            sd_frac = CONT_SD_START * CONT_SD_SHRINK ** (it - 2)
            entries = list(elites)
            while len(entries) < n_cfg:
                parent = elites[rng.integers(len(elites))].config if elites \
                    else None
                cfg = sample_near(space, parent, rng, p_stick, sd_frac) \
                    if parent is not None else sample_random(space, rng)
                entries.append(Entry(config=cfg, order=order))
                order += 1
        alive, used = race(entries, evaluator, next_seed, share,
                           min_results=min_results, alpha=alpha,
                           n_elite=n_elite, failure_score=failure_score,
                           log=log, iteration=it, jobs=jobs)
        used_total += used
        elites = _select_elites(alive, n_elite)

    return [Elite(config=e.config, config_id=e.cid, tuner_aoc=e.mean_score,
                  n_tuning_runs=len(e.scores)) for e in elites]


def verify(elites: list[Elite], evaluator, n_runs: int = 25,
           seed_base: int = 1000, failure_score: float = math.inf,
           jobs: int = 1) -> list[Elite]:
    """Re-run every elite on the same seed list; rank by verified mean."""
    if not elites:
        raise ValueError("no elites to verify")
    seeds = list(range(seed_base, seed_base + n_runs))
    verified = []
    for elite in elites:
        if jobs <= 1:
            values = []
            for s in seeds:
                try:
                    values.append(float(evaluator(elite.config, s)))
                except Exception:
                    values.append(float(failure_score))
        else:
            values = [float(v) for v in
                      pmap(evaluator, [(elite.config, s) for s in seeds],
                           jobs=jobs, on_error=float(failure_score))]
        verified.append(replace(elite, verified_aoc=values))
    verified.sort(key=lambda e: e.verified_mean)
    return verified
