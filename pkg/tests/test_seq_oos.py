import math

import numpy as np
import pytest

from costly_obs import seq_oos, sim_oos
from costly_obs.environment import (
    STOP,
    Environment,
    GenerativeModel,
    make_parity_model,
    make_random_model,
    make_switch_model,
    oracle_seq,
    policy_gain_seq,
)
from costly_obs.estimation import ConfidenceParams, LearnerConfig
from costly_obs.partial_state import from_bitmask
from costly_obs.trace import RunTrace, compute_gain

from conftest import preload_counters, rational_model


def plan_for(model, config, counters=None):
    state = seq_oos.SeqOosState.for_model(model, config)
    if counters is not None:
        state.counters = counters
    c = state.counters
    return state, seq_oos.odp_plan(c, state.params, config.beta, config.m, state.space, state.costs, model.A,
                                    t=max(1, c.t))


def test_m0_is_a_bandit():
    model = make_parity_model()
    _, plan = plan_for(model, LearnerConfig(m=0))
    empty = (None,) * 3
    assert plan.policy.obs_fn[empty] is STOP
    assert plan.policy.action_fn[empty] == 0
    assert plan.f_hat[empty] == 1.0


def test_cold_start_stops_immediately():
    model = make_random_model(np.random.default_rng(0), (2, 2, 3), 2, cost_range=(0.05, 0.2))
    _, plan = plan_for(model, LearnerConfig(m=2))
    empty = (None,) * 3
    assert plan.q_hat[(empty, STOP)] == 1.0
    for i in range(3):
        assert plan.q_hat[(empty, i)] == pytest.approx(1.0 - model.costs[i])
    assert plan.policy.obs_fn[empty] is STOP


def test_one_bit_exact_plan(one_bit_model):
    state = seq_oos.SeqOosState.for_model(one_bit_model, LearnerConfig(m=1, radius_scale=0.0))
    preload_counters(state.counters, state.space, one_bit_model, np.array([1, 1]),
                     np.array([[1, 0], [0, 1]]), 1)
    plan = seq_oos.start_round(state)
    assert plan.policy.obs_fn[(None,)] == 0
    assert plan.f_hat[(None,)] == pytest.approx(0.9)


@pytest.mark.parametrize("seed", range(5))
def test_exact_counters_and_zero_radii_reproduce_the_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    model, w, ticks, R = rational_model(rng, (2, 2, 3), 2)
    config = LearnerConfig(m=2, beta=1.5, radius_scale=0.0)
    state = seq_oos.SeqOosState.for_model(model, config)
    preload_counters(state.counters, state.space, model, w, ticks, R)
    plan = seq_oos.start_round(state)
    oracle = oracle_seq(model, 2, 1.5)
    assert plan.f_hat[state.space.empty] == pytest.approx(oracle.value, abs=1e-9)
    assert plan.policy.obs_fn == oracle.policy.obs_fn
    assert plan.policy.action_fn == oracle.policy.action_fn
    assert policy_gain_seq(model, plan.policy, 1.5, 2) == pytest.approx(oracle.value, abs=1e-9)


def test_plan_values_are_internally_consistent():
    model = make_random_model(np.random.default_rng(1), (2, 3, 2), 3)
    config = LearnerConfig(m=2)
    state = seq_oos.SeqOosState.for_model(model, config)
    seq_oos.run_seq(3000, model, config, np.random.default_rng(2), state=state)
    plan = seq_oos.start_round(state)
    for psi, f in plan.f_hat.items():
        qs = [q for (p, _), q in plan.q_hat.items() if p == psi]
        assert f == max(qs)
        assert plan.q_hat[(psi, plan.policy.obs_fn[psi])] == f


def test_wider_radii_never_lower_the_root_value():
    model = make_random_model(np.random.default_rng(3), (2, 2, 2), 2)
    config = LearnerConfig(m=2)
    state = seq_oos.SeqOosState.for_model(model, config)
    seq_oos.run_seq(2000, model, config, np.random.default_rng(4), state=state)
    values = []
    for scale in (0.0, 0.5, 1.0, 2.0):
        params = ConfidenceParams.for_space(state.space, model.A, 0.1, scale)
        plan = seq_oos.odp_plan(state.counters, params, 1.0, 2, state.space, state.costs, model.A)
        values.append(plan.f_hat[state.space.empty])
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_phase_budget_and_stop_paths():
    model = make_switch_model(cost=0.02)
    config = LearnerConfig(m=2)
    state = seq_oos.SeqOosState.for_model(model, config)
    trace = seq_oos.run_seq(5000, model, config, np.random.default_rng(5), state=state)
    n_obs = trace.n_observations()
    assert n_obs.max() <= 2
    assert np.all(trace.cost == n_obs * 0.02)
    # every phase is a transition visit; STOP phases are not
    assert sum(state.counters.n_trans_pair.values()) == n_obs.sum()
    for psi, mask in zip(trace.psi, trace.obs_mask):
        assert tuple(i for i, x in enumerate(psi) if x is not None) == from_bitmask(int(mask))


def test_round_lengths_double():
    model = GenerativeModel([(0, 1), (0, 1)], [0, 0, 1, 0], [[1.0] * 4], [0.0, 0.0])
    config = LearnerConfig(m=2)
    state = seq_oos.SeqOosState.for_model(model, config)
    env = Environment(model, np.random.default_rng(0), 100)
    trace = RunTrace.allocate("seq-oos", 1.0, 100)
    lengths = []
    for _ in range(5):
        plan = seq_oos.start_round(state)
        assert plan.policy.obs_fn[state.space.empty] is STOP
        lengths.append(seq_oos.run_round_seq(state, env, trace))
    assert lengths == [1, 1, 2, 4, 8]
    assert not state.counters.n_trans_pair
    assert np.all(trace.cost[:16] == 0)


def test_single_step_run():
    trace = seq_oos.run_seq(1, make_parity_model(), LearnerConfig(m=2), np.random.default_rng(0))
    assert trace.T == 1 and trace.rounds == 1
    assert trace.n_observations()[0] <= 2


def test_worthless_observations_are_dropped():
    # rewards do not depend on the state; at smaller costs the t^5 term in the
    # reward radius keeps exploration going well past 10^5 steps
    rng = np.random.default_rng(6)
    base = make_random_model(rng, (2, 2, 2), 2, cost_range=(0.2, 0.2))
    rewards = np.repeat([[0.3], [0.6]], len(base.states), axis=1)
    model = GenerativeModel(base.alphabets, base.joint, rewards, base.costs)
    T = 100_000
    trace = seq_oos.run_seq(T, model, LearnerConfig(m=2), np.random.default_rng(7))
    assert (trace.obs_mask[T // 2:] > 0).mean() <= 0.10


def test_sequential_gain_not_below_simultaneous():
    model = make_switch_model(cost=0.02)
    T = 100_000
    config = LearnerConfig(m=3)
    seq = seq_oos.run_seq(T, model, config, np.random.default_rng(8))
    sim = sim_oos.run(T, model, config, np.random.default_rng(8))
    diff = seq.step_gain() - sim.step_gain()
    sigma = diff.std() / math.sqrt(T)
    assert compute_gain(seq) >= compute_gain(sim) - 3 * sigma
