"""The configurable CMA-ES generation loop.

Candidates x = m + sigma * B D z are produced by the sampling pipeline,
repaired by the boundary module, selected comma/plus/pairwise/sequentially,
and folded into the usual mean / evolution-path / covariance updates with
optional negative-weight (active) covariance contributions.  Step-size
control is delegated to the stepsize module, restart sizing to the restart
module.  A run owns all of its state including the random stream, so
identical (configuration, problem, budget, seed) give bitwise-identical
traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import stepsize
from .boundary import Box, correct
from .config import Configuration
from .linalg import jacobi_eigh
from .metrics import FINAL_TARGET, RunTrace
from .parameters import StrategyParameters, default_parameters
from .restart import RestartLedger, next_restart_config, should_restart
from .sampling import Sampler, sampler_spec_for

EIGEN_FLOOR = 1e-30
SIGMA0_BOX_FRACTION = 0.2

# threshold convergence: required step length decays linearly to zero
THRESHOLD_INIT = 0.2
THRESHOLD_DECAY_EXPONENT = 1.0


class RestartCondition(Exception):
    """The strategy state degenerated beyond repair for this sub-run."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class Individual:
    """One candidate: base sample z, scaled step y, repaired point x."""

    z: np.ndarray
    y: np.ndarray
    x: np.ndarray
    f: float = math.inf
    evaluated: bool = False
    pair_id: int | None = None
    trial_sigma: float | None = None


@dataclass
class CmaState:
    """Full mutable strategy state of one (sub-)run."""

    m: np.ndarray
    C: np.ndarray
    B: np.ndarray
    D: np.ndarray
    sigma: float
    sigma0: float
    p_sigma: np.ndarray
    p_c: np.ndarray
    t: int = 0
    evals: int = 0                       # global across restarts
    best_f: float = math.inf
    best_x: np.ndarray | None = None
    prev_pop: list | None = None         # previous generation, evaluated
    prev_parents: list | None = None
    cur_pop: list | None = None
    s: float = 0.0                       # step-size accumulator
    last_eig: float = 0.0
    gen_best: list = field(default_factory=list)  # best f per generation since (re)start


def init_state(d: int, box: Box, sigma0: float, rng: np.random.Generator,
               m0: np.ndarray | None = None) -> CmaState:
    if m0 is None:
        m0 = rng.uniform(box.lb, box.ub)
    return CmaState(
        m=np.asarray(m0, dtype=float).copy(),
        C=np.eye(d), B=np.eye(d), D=np.ones(d),
        sigma=float(sigma0), sigma0=float(sigma0),
        p_sigma=np.zeros(d), p_c=np.zeros(d),
    )


def refresh_eigensystem(state: CmaState, params: StrategyParameters,
                        force: bool = False) -> None:
    """Lazily refresh B, D from C (recompute when staleness exceeds one unit)."""
    clock = state.t * (params.c1 + params.c_mu) * params.d
    if not force and clock <= state.last_eig + 1.0:
        return
    if not np.isfinite(state.C).all():
        raise RestartCondition("covariance_not_finite")
    w, v = jacobi_eigh(state.C)
    if not (np.isfinite(w).all() and np.isfinite(v).all()):
        raise RestartCondition("eigendecomposition_failed")
    w = np.maximum(w, EIGEN_FLOOR)
    if not (w > 0.0).all():
        raise RestartCondition("covariance_not_positive")
    state.D = np.sqrt(w)
    state.B = v
    state.last_eig = clock


def threshold_length(box: Box, evals: int, budget: int) -> float:
    """Decaying minimum mutation length for threshold convergence."""
    frac = max(0.0, (budget - evals) / budget)
    return THRESHOLD_INIT * box.diameter * frac ** THRESHOLD_DECAY_EXPONENT


def generate_population(state: CmaState, params: StrategyParameters,
                        cfg: Configuration, sampler: Sampler, box: Box,
                        rng: np.random.Generator, budget: int) -> list[Individual]:
    """lam unevaluated candidates for the current distribution."""
    refresh_eigensystem(state, params)
    samples = sampler.generation(params.lam)
    use_trial = cfg.ssa == "p-xnes"
    tau = stepsize.pxnes_tau(params.d) if use_trial else 0.0
    thr = threshold_length(box, state.evals, budget) \
        if cfg.threshold_convergence else 0.0
    pop = []
    for sample in samples:
        z = sample.z
        y = state.B @ (state.D * z)
        sig = state.sigma * math.exp(tau * rng.standard_normal()) \
            if use_trial else state.sigma
        if thr > 0.0:
            step = sig * float(np.linalg.norm(y))
            if 0.0 < step < thr:
                y = y * (thr / step)
        x = correct(state.m + sig * y, box, cfg.bound_correction, rng)
        pop.append(Individual(z=z, y=y, x=x, pair_id=sample.pair_id,
                              trial_sigma=sig if use_trial else None))
    return pop


def evaluate_and_select(pop: list[Individual], state: CmaState,
                        params: StrategyParameters, cfg: Configuration,
                        objective, max_evals: int | None = None,
                        on_eval=None):
    """Evaluate candidates in order and pick the ranked parent set.

    Returns (parents, ranked, evals_used).  Sequential selection stops as
    soon as the generation's best improves on the previous generation's
    best and at least mu candidates have been evaluated.  Pairwise
    selection keeps the better of each mirror pair; elitism merges the
    previous parents into the ranking.  Non-finite objective values rank
    last and never become parents.
    """
    cap = len(pop) if max_evals is None else min(len(pop), max_evals)
    # nothing to improve on before the first full generation
    prev_best = -math.inf
    if cfg.sequential and state.prev_pop:
        prev_best = min(ind.f for ind in state.prev_pop)
    evals_used = 0
    gen_best = math.inf
    for ind in pop:
        if evals_used >= cap:
            break
        value = float(objective(ind.x))
        evals_used += 1
        ind.f = value if math.isfinite(value) else math.inf
        ind.evaluated = True
        if on_eval is not None:
            on_eval(ind.f, ind.x)
        gen_best = min(gen_best, ind.f)
        if cfg.sequential and evals_used >= params.seq_min_evals \
                and gen_best < prev_best:
            break
    evaluated = [ind for ind in pop if ind.evaluated]

    pool = evaluated
    if cfg.mirrored == "mirrored_pairwise":
        by_pair: dict = {}
        for ind in evaluated:
            key = ind.pair_id if ind.pair_id is not None else id(ind)
            cur = by_pair.get(key)
            if cur is None or ind.f < cur.f:
                by_pair[key] = ind
        pool = list(by_pair.values())
    if cfg.elitist and state.prev_parents:
        pool = pool + list(state.prev_parents)

    ranked = sorted(pool, key=lambda ind: ind.f)
    parents = [ind for ind in ranked if math.isfinite(ind.f)][:params.mu]
    return parents, ranked, evals_used


def update_distribution(state: CmaState, parents: list[Individual],
                        params: StrategyParameters, cfg: Configuration,
                        ranked: list[Individual] | None = None) -> None:
    """Mean, evolution paths and covariance update (tutorial equations).

    ``ranked`` supplies the tail candidates penalized by the active update;
    outer products are accumulated explicitly so C stays exactly symmetric.
    """
    if not parents:
        raise RestartCondition("no_finite_parents")
    d = params.d
    mu_used = len(parents)
    w = params.w[:mu_used]
    if mu_used < params.mu:
        w = w / w.sum()

    m_old = state.m
    m_new = np.zeros(d)
    for wi, ind in zip(w, parents):
        m_new += wi * ind.x
    dm = (m_new - m_old) / state.sigma

    cs, cc = params.c_sigma, params.c_c
    whitened = state.B @ ((state.B.T @ dm) / state.D)   # C^(-1/2) dm
    state.p_sigma = (1.0 - cs) * state.p_sigma \
        + math.sqrt(cs * (2.0 - cs) * params.mu_eff) * whitened
    ps_norm = float(np.linalg.norm(state.p_sigma))
    expected_drift = math.sqrt(1.0 - (1.0 - cs) ** (2 * (state.t + 1)))
    hsig = 1.0 if ps_norm / expected_drift < (1.4 + 2.0 / (d + 1)) * params.chi_d \
        else 0.0
    state.p_c = (1.0 - cc) * state.p_c \
        + hsig * math.sqrt(cc * (2.0 - cc) * params.mu_eff) * dm

    delta_hsig = (1.0 - hsig) * cc * (2.0 - cc)
    c1, c_mu = params.c1, params.c_mu

    rank_mu = np.zeros((d, d))
    w_sum = float(w.sum())
    for wi, ind in zip(w, parents):
        rank_mu += wi * np.outer(ind.y, ind.y)
    if cfg.active and params.w_neg is not None and ranked is not None:
        finite = [ind for ind in ranked if math.isfinite(ind.f)]
        tail = finite[mu_used:]
        n_neg = min(len(params.w_neg), len(tail))
        # worst candidate takes the most negative weight
        for j in range(n_neg):
            wi = params.w_neg[-(j + 1)]
            ind = tail[-(j + 1)]
            if wi == 0.0:
                continue
            zn = float(np.linalg.norm(state.B @ ((state.B.T @ ind.y) / state.D)))
            scale = d / zn ** 2 if zn > 0.0 else 0.0
            w_sum += wi
            rank_mu += (wi * scale) * np.outer(ind.y, ind.y)

    state.C = (1.0 + c1 * delta_hsig - c1 - c_mu * w_sum) * state.C \
        + c1 * np.outer(state.p_c, state.p_c) + c_mu * rank_mu
    state.C = 0.5 * (state.C + state.C.T)
    if not np.isfinite(state.C).all():
        raise RestartCondition("covariance_not_finite")
    state.m = m_new
    state.t += 1


def _adapt_sigma(state: CmaState, params: StrategyParameters, cfg: Configuration,
                 parents, ranked, m_old, objective, remaining: int,
                 on_eval) -> int:
    """Apply the configured step-size rule; returns extra evaluations used."""
    cur_f = np.array([ind.f for ind in state.cur_pop])
    prev_f = np.array([ind.f for ind in state.prev_pop]) if state.prev_pop else None
    mu_used = len(parents)
    w = params.w[:mu_used]
    if mu_used < params.mu:
        w = w / w.sum()
    si = stepsize.SsaInput(
        cur_f=cur_f, prev_f=prev_f,
        z_sel=[ind.z for ind in parents], w_sel=w,
        trial_sigmas=np.array([ind.trial_sigma for ind in parents], dtype=float)
        if cfg.ssa == "p-xnes" else None,
        m_old=m_old, m_new=state.m, sigma=state.sigma,
        p_sigma=state.p_sigma, B=state.B, D=state.D,
        chi_d=params.chi_d, c_sigma=params.c_sigma, d_sigma=params.d_sigma,
        mu_eff=params.mu_eff, s=state.s,
    )
    extra = 0
    method = cfg.ssa
    if method == "csa":
        state.sigma *= stepsize.adapt_csa(si)
    elif method == "tpa":
        shift = state.m - m_old
        norm = float(np.linalg.norm(shift))
        if norm > 0.0 and remaining >= 2:
            whitened = float(np.linalg.norm(
                state.B @ ((state.B.T @ shift) / state.D)))
            offset = stepsize.TPA_ALPHA * state.sigma * whitened * (shift / norm)
            f_fwd = float(objective(state.m + offset))
            f_back = float(objective(state.m - offset))
            extra = 2
            if on_eval is not None:
                on_eval(f_fwd, state.m + offset)
                on_eval(f_back, state.m - offset)
            mult, state.s = stepsize.adapt_tpa(si, f_fwd < f_back)
            state.sigma *= mult
    elif method == "msr":
        mult, state.s = stepsize.adapt_msr(si)
        state.sigma *= mult
    elif method == "psr":
        mult, state.s = stepsize.adapt_psr(si)
        state.sigma *= mult
    elif method == "xnes":
        state.sigma *= stepsize.adapt_xnes(si)
    elif method == "m-xnes":
        state.sigma *= stepsize.adapt_m_xnes(si)
    elif method == "p-xnes":
        state.sigma = stepsize.adapt_p_xnes(si)
    return extra


@dataclass
class RunContext:
    """Bundles everything one run needs; mainly a test seam."""

    cfg: Configuration
    params: StrategyParameters
    state: CmaState
    sampler: Sampler
    rng: np.random.Generator
    box: Box
    objective: object
    budget: int
    on_eval: object = None


def step_generation(ctx: RunContext) -> str | None:
    """Advance one generation; returns a restart-condition reason or None."""
    state, params, cfg = ctx.state, ctx.params, ctx.cfg
    remaining = ctx.budget - state.evals
    pop = generate_population(state, params, cfg, ctx.sampler, ctx.box,
                              ctx.rng, ctx.budget)
    parents, ranked, used = evaluate_and_select(
        pop, state, params, cfg, ctx.objective, max_evals=remaining,
        on_eval=ctx.on_eval)
    state.evals += used
    evaluated = [ind for ind in pop if ind.evaluated]
    state.cur_pop = evaluated
    m_old = state.m.copy()
    try:
        update_distribution(state, parents, params, cfg, ranked=ranked)
        extra = _adapt_sigma(state, params, cfg, parents, ranked, m_old,
                             ctx.objective, ctx.budget - state.evals,
                             ctx.on_eval)
        state.evals += extra
    except RestartCondition as rc:
        return rc.reason
    state.prev_pop = evaluated
    state.prev_parents = parents
    state.gen_best.append(min(ind.f for ind in evaluated))
    return should_restart(state, state.gen_best, lam=params.lam)


def run(cfg: Configuration, problem, budget: int, seed: int,
        x0: np.ndarray | None = None,
        sigma0: float | None = None) -> RunTrace:
    """One full optimization run; returns the best-so-far trace.

    Loops generations (with the configured restart strategy) until the
    budget is exhausted, the final precision target is reached, or -- with
    restarts off -- the first stagnation trigger fires.
    """
    cfg.validate()
    d = problem.d
    box = problem.box
    params = default_parameters(d, cfg)
    tpa_extra = 2 if cfg.ssa == "tpa" else 0
    if budget < params.lam + tpa_extra:
        raise ValueError(f"budget {budget} cannot afford one generation")

    rng = np.random.default_rng(seed)
    sampler = Sampler(sampler_spec_for(cfg, d), rng)
    sigma_init = float(sigma0) if sigma0 is not None \
        else SIGMA0_BOX_FRACTION * float(box.width[0])
    state = init_state(d, box, sigma_init, rng, m0=x0)
    ledger = RestartLedger(params.lam) if cfg.restart != "off" else None

    improvements: list[tuple[int, float]] = []
    counter = {"evals": 0}

    def on_eval(f: float, x: np.ndarray) -> None:
        counter["evals"] += 1
        if f < state.best_f:
            state.best_f = f
            state.best_x = x.copy()
            improvements.append((counter["evals"], f - problem.f_opt))

    ctx = RunContext(cfg=cfg, params=params, state=state, sampler=sampler,
                     rng=rng, box=box, objective=problem.evaluate,
                     budget=budget, on_eval=on_eval)
    subrun_start = 0
    while True:
        if budget - state.evals < params.lam + tpa_extra:
            break
        reason = step_generation(ctx)
        if state.best_f - problem.f_opt <= FINAL_TARGET:
            break
        if reason is not None:
            if cfg.restart == "off":
                break
            ledger.charge(state.evals - subrun_start)
            lam_next, sigma_next = next_restart_config(
                ledger, cfg.restart, rng, sigma_init)
            if budget - state.evals < lam_next + 2:
                break
            params = default_parameters(d, cfg.with_option("lambda", lam_next))
            evals_so_far, best_f, best_x = state.evals, state.best_f, state.best_x
            state = init_state(d, box, sigma_next, rng)
            state.evals, state.best_f, state.best_x = evals_so_far, best_f, best_x
            subrun_start = state.evals
            ctx.state, ctx.params = state, params
            tpa_extra = 2 if cfg.ssa == "tpa" else 0

    return RunTrace(improvements=improvements, budget=budget,
                    config_id=cfg.config_id(), fid=getattr(problem, "fid", ""),
                    iid=getattr(problem, "iid", 0), seed=seed)
