"""Derived strategy parameters: population sizes, weights, learning rates.

Defaults follow the canonical CMA-ES parameterization; any learning rate
present on the configuration replaces its default.  The recombination head
(first mu weights) is always normalized to sum to one; the negative tail is
attached only when the active covariance update is enabled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import Configuration, ConfigurationError
from .sampling import expected_norm


def default_lambda(d: int) -> int:
    return 4 + int(math.floor(3.0 * math.log(d)))


def raw_weights(option: str, lam: int, mu: int) -> np.ndarray:
    """Unnormalized recombination weights over the full population.

    default: log-linear preference ln((lam+1)/2) - ln(i);
    equal: 1/mu on the head, zero tail;
    half_power_lambda: 1/2^i + 1/(lam*2^lam) for i = 1..lam.
    """
    i = np.arange(1, lam + 1, dtype=float)
    if option == "default":
        return np.log((lam + 1) / 2.0) - np.log(i)
    if option == "equal":
        w = np.zeros(lam)
        w[:mu] = 1.0 / mu
        return w
    if option == "half_power_lambda":
        return 0.5 ** i + 1.0 / (lam * 2.0 ** lam)
    raise ConfigurationError(f"unknown weights option {option!r}")


@dataclass
class StrategyParameters:
    """All run-constant quantities derived from (d, Configuration)."""

    d: int
    lam: int
    mu: int
    w: np.ndarray                      # positive head, sums to 1
    w_neg: np.ndarray | None           # scaled negative tail (active update)
    mu_eff: float
    c1: float
    c_mu: float
    c_c: float
    c_sigma: float
    d_sigma: float
    chi_d: float
    seq_min_evals: int = field(default=0)

    @property
    def w_full(self) -> np.ndarray:
        """Length-lam weight vector (zero tail when the update is not active)."""
        tail = self.w_neg if self.w_neg is not None else np.zeros(self.lam - self.mu)
        return np.concatenate([self.w, tail])


def default_parameters(d: int, cfg: Configuration) -> StrategyParameters:
    """Strategy parameters for dimension ``d`` under configuration ``cfg``."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    lam = cfg.lambda_ if cfg.lambda_ is not None else default_lambda(d)
    if lam < 2:
        raise ConfigurationError(f"population size {lam} < 2")
    mu = lam // 2

    w_all = raw_weights(cfg.weights, lam, mu)
    head = w_all[:mu].copy()
    if (head <= 0).any():
        raise ConfigurationError("positive weight head must be strictly positive")
    head /= head.sum()
    mu_eff = float(head.sum() ** 2 / (head ** 2).sum())

    c1 = cfg.c1 if cfg.c1 is not None else 2.0 / ((d + 1.3) ** 2 + mu_eff)
    c_mu_default = min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff)
                       / ((d + 2.0) ** 2 + mu_eff))
    c_mu = cfg.c_mu if cfg.c_mu is not None else max(0.0, c_mu_default)
    if c1 + c_mu > 1.0:
        # repair instead of reject: keeps the tuning box rectangular
        scale = 1.0 / (c1 + c_mu + 1e-12)
        c1 *= scale
        c_mu *= scale
    c_c = cfg.c_c if cfg.c_c is not None else \
        (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d)
    c_sigma = cfg.c_sigma if cfg.c_sigma is not None else \
        (mu_eff + 2.0) / (d + mu_eff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (d + 1.0)) - 1.0) \
        + c_sigma

    w_neg = _negative_tail(d, lam, mu, mu_eff, c1, c_mu) if cfg.active else None

    return StrategyParameters(
        d=d, lam=lam, mu=mu, w=head, w_neg=w_neg, mu_eff=mu_eff,
        c1=c1, c_mu=c_mu, c_c=c_c, c_sigma=c_sigma, d_sigma=d_sigma,
        chi_d=expected_norm(d), seq_min_evals=mu,
    )


def _negative_tail(d, lam, mu, mu_eff, c1, c_mu) -> np.ndarray:
    """Negative weights for the active update, scaled to protect C.

    The raw log-linear tail is rescaled by the usual min of the three
    safeguards (mu-, mueff- and positive-definiteness-bounds); a zero c_mu
    disables the tail entirely.
    """
    i = np.arange(mu + 1, lam + 1, dtype=float)
    raw = np.minimum(0.0, np.log((lam + 1) / 2.0) - np.log(i))
    neg_sum = -raw.sum()
    if neg_sum <= 0.0 or c_mu <= 0.0:
        return np.zeros(lam - mu)
    mu_eff_neg = raw.sum() ** 2 / (raw ** 2).sum()
    a_mu = 1.0 + c1 / c_mu
    a_mueff = 1.0 + 2.0 * mu_eff_neg / (mu_eff + 2.0)
    a_posdef = (1.0 - c1 - c_mu) / (d * c_mu)
    scale = min(a_mu, a_mueff, a_posdef)
    if scale <= 0.0:
        return np.zeros(lam - mu)
    return raw * (scale / neg_sum)
