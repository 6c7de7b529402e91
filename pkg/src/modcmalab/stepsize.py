"""Step-size adaptation rules, one call per generation.

Seven options: the cumulative-path rule (csa), the two-point rank rule
(tpa), success rules driven by a previous-population quantile (msr) or by
joint rank sums (psr), and three natural-evolution-strategy style rules
based on selected mutation lengths (xnes), the mean shift (m-xnes) or
per-candidate log-normal trial step sizes (p-xnes).

csa/tpa/msr/psr share the damping d_sigma for comparability; the xnes
family exponentiates the raw c_sigma.  All constants live here so they can
be ablated in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

# committed constants (rules are specified qualitatively in the literature)
MSR_QUANTILE = 0.3          # K counts candidates better than the ceil(0.3*lam)-th best
MSR_SMOOTHING = 0.3
PSR_TARGET = 0.25           # neutral rank-difference success rate
PSR_SMOOTHING = 0.9
TPA_ALPHA = 0.5             # probe offset as a fraction of the sigma-normalized shift
TPA_SMOOTHING = 0.3

# sigma leaving [lo, hi] * initial sigma signals a restart condition
SIGMA_CLAMP_LO = 1e-14
SIGMA_CLAMP_HI = 1e14


def pxnes_tau(d: int) -> float:
    """Log-normal spread of p-xnes trial step sizes."""
    return 1.0 / math.sqrt(2.0 * d)


@dataclass
class SsaInput:
    """Everything a step-size rule may consume for one generation."""

    cur_f: np.ndarray                   # ranked fitness of the current population
    prev_f: np.ndarray | None           # previous population's fitness, None on gen 1
    z_sel: list | None                  # base samples of the selected (ranked) parents
    w_sel: np.ndarray | None            # recombination weights matching z_sel
    trial_sigmas: np.ndarray | None     # ranked trial sigmas (p-xnes only)
    m_old: np.ndarray | None
    m_new: np.ndarray | None
    sigma: float = 1.0
    p_sigma: np.ndarray | None = None
    B: np.ndarray | None = None
    D: np.ndarray | None = None
    chi_d: float = 1.0
    c_sigma: float = 0.3
    d_sigma: float = 1.0
    mu_eff: float = 1.0
    s: float = 0.0                      # per-run accumulator (tpa/msr/psr)


def adapt_csa(si: SsaInput) -> float:
    """exp((c_sigma/d_sigma) * (||p_sigma||/chi_d - 1))."""
    norm = float(np.linalg.norm(si.p_sigma))
    return math.exp((si.c_sigma / si.d_sigma) * (norm / si.chi_d - 1.0))


def adapt_tpa(si: SsaInput, forward_better: bool | None = None):
    """Two-point rule; returns (multiplier, new accumulator).

    The caller evaluates the forward/backward probes around the new mean;
    a zero mean shift is the neutral point and leaves sigma unchanged.
    """
    if forward_better is None or si.m_new is None or si.m_old is None \
            or not np.any(si.m_new != si.m_old):
        return 1.0, si.s
    z = 1.0 if forward_better else -1.0
    s = (1.0 - TPA_SMOOTHING) * si.s + TPA_SMOOTHING * z
    return math.exp(s / si.d_sigma), s


def adapt_msr(si: SsaInput):
    """Median-style success rule; returns (multiplier, new accumulator).

    K counts current individuals better than the ceil(0.3*lam)-th best
    previous value; the centered rate (2/lam)*(K - (lam+1)/2) is smoothed
    into the accumulator.
    """
    if si.prev_f is None or si.prev_f.size == 0:
        return 1.0, si.s
    lam = si.cur_f.size
    k_q = max(1, math.ceil(MSR_QUANTILE * si.prev_f.size))
    q = np.sort(si.prev_f)[k_q - 1]
    k_succ = int((si.cur_f < q).sum())
    z = (2.0 / lam) * (k_succ - (lam + 1) / 2.0)
    s = (1.0 - MSR_SMOOTHING) * si.s + MSR_SMOOTHING * z
    return math.exp(s / si.d_sigma), s


def adapt_psr(si: SsaInput):
    """Population rank-sum success rule; returns (multiplier, new accumulator)."""
    if si.prev_f is None or si.prev_f.size == 0:
        return 1.0, si.s
    n = min(si.cur_f.size, si.prev_f.size)
    cur, prev = si.cur_f[:n], si.prev_f[:n]
    ranks = rankdata(np.concatenate([cur, prev]), method="average")
    delta = float((ranks[n:].sum() - ranks[:n].sum()) / n ** 2) - PSR_TARGET
    s = (1.0 - PSR_SMOOTHING) * si.s + PSR_SMOOTHING * delta
    return math.exp(s / si.d_sigma), s


def adapt_xnes(si: SsaInput) -> float:
    """Selected mutation lengths vs. their expectation, recombination-weighted."""
    total = 0.0
    for w, z in zip(si.w_sel, si.z_sel):
        total += w * (float(np.linalg.norm(z)) - si.chi_d) / si.chi_d
    return math.exp(si.c_sigma * total)


def adapt_m_xnes(si: SsaInput) -> float:
    """Sigma-normalized mean shift length vs. chi_d in whitened coordinates."""
    dm = (si.m_new - si.m_old) / si.sigma
    shift = math.sqrt(si.mu_eff) * float(np.linalg.norm((si.B.T @ dm) / si.D))
    return math.exp(si.c_sigma * (shift - si.chi_d) / si.chi_d)


def adapt_p_xnes(si: SsaInput) -> float:
    """New sigma: exp of the weighted sum of ranked log trial step sizes."""
    if si.trial_sigmas is None:
        raise ValueError("p-xnes requires trial sigmas recorded at generation time")
    return math.exp(float(si.w_sel @ np.log(si.trial_sigmas)))
