import numpy as np
import pytest

from modcmalab.benchmarks import make_instance
from modcmalab.boundary import Box
from modcmalab.config import Configuration
from modcmalab.core import RunContext, init_state, run, step_generation
from modcmalab.parameters import default_parameters
from modcmalab.restart import (RestartLedger, next_restart_config,
                               should_restart, stagnation_window)
from modcmalab.sampling import Sampler, sampler_spec_for


def _state_with(d=5, sigma=1.0, sigma0=1.0, D=None, fs=(1.0, 2.0, 3.0)):
    state = init_state(d, Box.cube(d), sigma0, np.random.default_rng(0),
                       m0=np.zeros(d))
    state.sigma = sigma
    if D is not None:
        state.D = np.asarray(D, dtype=float)

    class _Ind:
        def __init__(self, f):
            self.f = f

    state.cur_pop = [_Ind(f) for f in fs]
    return state


def test_flat_fitness_triggers():
    state = _state_with(fs=(7.0, 7.0, 7.0, 7.0))
    assert should_restart(state, [7.0], lam=8) == "flat"


def test_condition_number_triggers():
    state = _state_with(D=[1.0, 1.0, 1.0, 1.0, np.sqrt(1e15)])
    assert should_restart(state, [1.0], lam=8) == "condition"


def test_sigma_dmax_triggers():
    state = _state_with(sigma=1e-13, D=[1.0] * 5)
    assert should_restart(state, [1.0], lam=8) == "sigma_dmax"


def test_sigma_clamp_triggers():
    state = _state_with(sigma=1e15, sigma0=1.0, fs=(1.0, 2.0))
    assert should_restart(state, [1.0], lam=8) == "sigma_clamp"


def test_window_trigger_fires_on_stall():
    state = _state_with()
    w = stagnation_window(5, 8)
    history = list(np.linspace(10, 5, 40)) + [5.0] * w
    assert should_restart(state, history, lam=8) == "window"


def test_improving_run_never_triggers_early():
    # strictly improving sphere run: no trigger inside 50 generations
    cfg = Configuration()
    box = Box.cube(5)
    params = default_parameters(5, cfg)
    rng = np.random.default_rng(4)
    state = init_state(5, box, 2.0, rng)
    p = make_instance("sphere", 5, 1)
    ctx = RunContext(cfg=cfg, params=params, state=state,
                     sampler=Sampler(sampler_spec_for(cfg, 5), rng), rng=rng,
                     box=box, objective=p.evaluate, budget=10 ** 9)
    for _ in range(50):
        reason = step_generation(ctx)
        if state.best_f - p.f_opt < 1e-7:
            break
        assert reason is None


def test_triggers_individually_toggleable():
    state = _state_with(fs=(7.0, 7.0))
    assert should_restart(state, [7.0], lam=8, triggers=("window",)) is None


def test_ipop_doubles_three_times():
    ledger = RestartLedger(8)
    rng = np.random.default_rng(0)
    lams = []
    for _ in range(3):
        lam, sigma = next_restart_config(ledger, "ipop", rng, 2.0)
        assert sigma == 2.0
        lams.append(lam)
    assert lams == [16, 32, 64]
    assert ledger.lambda_large == 8 * 2 ** ledger.restarts


def test_bipop_first_restart_is_large():
    ledger = RestartLedger(8)
    ledger.charge(500)  # initial run counts to neither regime
    rng = np.random.default_rng(1)
    lam, sigma = next_restart_config(ledger, "bipop", rng, 2.0)
    assert ledger.regime == "large"
    assert lam == 16 and sigma == 2.0


def test_bipop_small_regime_bounds():
    rng = np.random.default_rng(2)
    for seed in range(50):
        ledger = RestartLedger(8, lambda_large=32, budget_used_large=10_000,
                               budget_used_small=0, regime="small")
        lam, sigma = next_restart_config(
            ledger, "bipop", np.random.default_rng(seed), 2.0)
        assert ledger.regime == "small"
        assert 8 // 2 <= lam <= 32 // 2
        assert 2.0 * 2.0 * 10 ** -2 <= sigma <= 2.0 * 2.0


def test_bipop_alternates_by_budget():
    ledger = RestartLedger(8)
    rng = np.random.default_rng(3)
    ledger.charge(100)                                   # initial: uncounted
    next_restart_config(ledger, "bipop", rng, 2.0)       # -> large
    ledger.charge(1000)
    next_restart_config(ledger, "bipop", rng, 2.0)       # large consumed more
    assert ledger.regime == "small"
    ledger.charge(5000)
    next_restart_config(ledger, "bipop", rng, 2.0)
    assert ledger.regime == "large"                      # 1000 < 5000


def test_restart_run_respects_budget():
    cfg = Configuration(restart="ipop")
    p = make_instance("sep_rastrigin", 5, 1)
    run(cfg, p, 5000, 1)
    assert p.evals <= 5000


def test_restart_off_ends_on_stagnation():
    flat = make_instance("sphere", 5, 1)
    flat.evaluate = lambda x: (setattr(flat, "evals", flat.evals + 1), 7.0)[1]
    trace = run(Configuration(), flat, 100_000, 0)
    assert flat.evals < 100_000  # ended at the first flat-fitness window


def test_restart_strategies_eventually_solve_rastrigin():
    # multimodal: plain run stalls locally, ipop keeps restarting
    p = make_instance("sep_rastrigin", 5, 1)
    trace = run(Configuration(restart="ipop"), p, 50_000, 3)
    plain = make_instance("sep_rastrigin", 5, 1)
    base = run(Configuration(), plain, 50_000, 3)
    assert trace.final_precision <= base.final_precision
