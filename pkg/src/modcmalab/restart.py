"""Stagnation detection and restart sizing (ipop / bipop).

ipop doubles the population on every restart; bipop alternates between a
doubling large regime and a small regime with randomized population size
and initial step size, always continuing whichever regime has consumed
less of the evaluation budget so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .stepsize import SIGMA_CLAMP_HI, SIGMA_CLAMP_LO

#: individually toggleable stagnation triggers
ALL_TRIGGERS = ("window", "condition", "sigma_dmax", "flat", "sigma_clamp")

WINDOW_TOL = 1e-12
CONDITION_LIMIT = 1e14
SIGMA_DMAX_TOL = 1e-12
FLAT_TOL = 1e-12


def stagnation_window(d: int, lam: int) -> int:
    """Generations of near-zero improvement tolerated before restarting."""
    return 10 + math.ceil(30.0 * d / lam)


def should_restart(state, window, lam: int | None = None,
                   triggers=ALL_TRIGGERS) -> str | None:
    """Name of the first firing stagnation trigger, or None.

    ``window`` is the per-generation best objective value since the last
    (re)start; ``state`` supplies sigma, sigma0, D and the current
    population's objective values.
    """
    if lam is None:
        lam = len(state.cur_pop)
    if "window" in triggers:
        w = stagnation_window(state.m.size, lam)
        if len(window) >= w and window[-w] - window[-1] < WINDOW_TOL:
            return "window"
    if "condition" in triggers and state.D is not None:
        d_max, d_min = float(np.max(state.D)), float(np.min(state.D))
        if d_min <= 0.0 or (d_max / d_min) ** 2 > CONDITION_LIMIT:
            return "condition"
    if "sigma_dmax" in triggers and state.D is not None:
        if state.sigma * float(np.max(state.D)) < SIGMA_DMAX_TOL:
            return "sigma_dmax"
    if "flat" in triggers and state.cur_pop:
        f = [ind.f for ind in state.cur_pop if math.isfinite(ind.f)]
        if f and max(f) - min(f) < FLAT_TOL:
            return "flat"
    if "sigma_clamp" in triggers:
        if not (SIGMA_CLAMP_LO * state.sigma0 <= state.sigma
                <= SIGMA_CLAMP_HI * state.sigma0):
            return "sigma_clamp"
    return None


@dataclass
class RestartLedger:
    """Bookkeeping across the restarts of one run."""

    lambda_base: int
    lambda_large: int = 0
    budget_used_large: int = 0
    budget_used_small: int = 0
    restarts: int = 0
    regime: str = "initial"             # regime of the sub-run in progress
    regime_history: list = field(default_factory=list)

    def __post_init__(self):
        if self.lambda_large == 0:
            self.lambda_large = self.lambda_base
        self.regime_history.append(self.regime)

    def charge(self, evals: int) -> None:
        """Charge a finished sub-run's evaluations to its regime.

        The initial run is charged to neither regime, so the first bipop
        restart always picks the large regime.
        """
        if self.regime == "large":
            self.budget_used_large += evals
        elif self.regime == "small":
            self.budget_used_small += evals


def next_restart_config(ledger: RestartLedger, strategy: str,
                        rng: np.random.Generator, sigma0: float):
    """Population size and initial step size for the next sub-run.

    ipop: double the population, reset sigma.  bipop: continue the regime
    with less consumed budget; the large regime doubles lambda_large, the
    small regime draws lambda in [lambda_base/2, lambda_large/2] and a
    shrunken sigma0.  The caller re-initializes the mean uniformly in the
    search box.
    """
    if strategy not in ("ipop", "bipop"):
        raise ValueError(f"no restart sizing for strategy {strategy!r}")
    ledger.restarts += 1
    if strategy == "ipop":
        ledger.lambda_large *= 2
        ledger.regime = "large"
        ledger.regime_history.append("large")
        return ledger.lambda_large, sigma0
    if ledger.budget_used_large <= ledger.budget_used_small:
        ledger.lambda_large *= 2
        ledger.regime = "large"
        ledger.regime_history.append("large")
        return ledger.lambda_large, sigma0
    u = rng.random()
    lam_small = int(ledger.lambda_base
                    * (ledger.lambda_large / ledger.lambda_base) ** (u * u)) // 2
    lam_small = max(2, lam_small)
    sigma_small = sigma0 * 2.0 * 10.0 ** (-2.0 * rng.random())
    ledger.regime = "small"
    ledger.regime_history.append("small")
    return lam_small, sigma_small
