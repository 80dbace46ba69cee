"""Optimistic learner that buys one observation set per step (simultaneous selection)."""
from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .environment import Environment, GenerativeModel, SimPolicy, argmax_first
from .estimation import ConfidenceParams, CounterStore, LearnerConfig, conf2_sim
from .partial_state import ObservationSet, StateSpace, to_bitmask
from .solver import optimistic_value
from .trace import RunTrace


class SimOosState:
    """Everything the learner knows: counters, costs, alphabets and the current plan.

    The learner is never given the joint distribution or the reward table.
    """

    def __init__(self, alphabets, n_actions: int, costs: Sequence[float], config: LearnerConfig,
                 keep_plans: bool = False):
        self.space = StateSpace(alphabets, config.m)
        self.A = n_actions
        self.costs = [float(c) for c in costs]
        self.config = config
        self.beta = config.beta
        self.params = ConfidenceParams.for_space(self.space, n_actions, config.delta, config.radius_scale)
        self.counters = CounterStore(self.space.D, self.space)
        self.round_index = 0
        self.round_policy: Optional[SimPolicy] = None
        self.round_vhat: Dict[ObservationSet, float] = {}
        self.t_k = 1
        self.keep_plans = keep_plans
        self.plan_log: List[Tuple[int, ObservationSet, Dict[ObservationSet, float]]] = []

    @classmethod
    def for_model(cls, model: GenerativeModel, config: LearnerConfig, **kwargs) -> "SimOosState":
        return cls(model.alphabets, model.A, model.costs, config, **kwargs)


def plan_round(state: SimOosState, params: Optional[ConfidenceParams] = None
               ) -> Tuple[SimPolicy, Dict[ObservationSet, float]]:
    """Optimistic plan for the round starting now.

    Each partial state gets the best upper-confidence reward over actions;
    each observation set gets the optimistic expectation of those values
    over an L1 ball around its empirical outcome distribution, minus its
    cost. Ties go to the smaller set, then to the lexicographically first.
    ``params`` overrides the state's confidence parameters.
    """
    counters, space = state.counters, state.space
    params = state.params if params is None else params
    beta = state.beta
    t = counters.t + 1
    reward_log = params.log_reward_term(t)
    scale = params.scale
    n_act, sum_reward = counters.n_act, counters.sum_reward
    action_of = {}
    vhat: Dict[ObservationSet, float] = {}
    for obs_set in space.obs_sets:
        psis = space.partials[obs_set]
        n_set = counters.n_obs_set.get(obs_set, 0)
        if n_set:
            p_hat = [counters.n_obs_partial.get(psi, 0) / n_set for psi in psis]
        else:
            p_hat = [1.0 / len(psis)] * len(psis)
        values = []
        for psi in psis:
            ucb = []
            for a in range(state.A):
                n = n_act.get((a, psi), 0)
                mean = sum_reward[(a, psi)] / n if n else 0.0
                radius = scale * min(1.0, math.sqrt(reward_log / (2.0 * max(1, n))))
                ucb.append(beta * mean + beta * radius)
            best = argmax_first(ucb)
            action_of[psi] = best
            values.append(ucb[best])
        radius = conf2_sim(n_set, t, params)
        vhat[obs_set] = optimistic_value(p_hat, values, radius) - sum(state.costs[i] for i in obs_set)
    sets = space.obs_sets
    chosen = sets[argmax_first([vhat[s] for s in sets])]
    policy = SimPolicy(chosen, {psi: action_of[psi] for psi in space.partials[chosen]})
    return policy, vhat


def start_round(state: SimOosState) -> SimPolicy:
    policy, vhat = plan_round(state)
    state.round_index += 1
    state.round_policy, state.round_vhat = policy, vhat
    state.t_k = state.counters.t + 1
    state.counters.start_round()
    if state.keep_plans:
        state.plan_log.append((state.t_k, policy.obs_set, vhat))
    return policy


def run_round(state: SimOosState, env: Environment, trace: RunTrace) -> int:
    """Execute the planned policy until some (action, partial state) pair doubles.

    Writes rows into ``trace`` starting at the current step and returns the
    number of steps taken.
    """
    policy = state.round_policy
    counters = state.counters
    obs_set = policy.obs_set
    reveal = state.space.reveal_table(obs_set)
    subs_table = state.space.substate_table
    action_map = policy.action_map
    cost = sum(state.costs[i] for i in obs_set)
    mask = to_bitmask(obs_set)
    n_obs_partial, n_obs_set = counters.n_obs_partial, counters.n_obs_set
    n_act, sum_reward, nu_act = counters.n_act, counters.sum_reward, counters.nu_act
    state_idx, T = env.state_idx, min(env.horizon, trace.T)
    t0 = t = counters.t
    while t < T:
        psi = reveal[state_idx[t]]
        a = action_map[psi]
        r = env.reward(a, t)
        for dom, sub in subs_table[psi]:
            n_obs_partial[sub] += 1
            n_obs_set[dom] += 1
        key = (a, psi)
        n_act[key] += 1
        sum_reward[key] += r
        nu = nu_act[key] + 1
        nu_act[key] = nu
        trace.obs_mask[t] = mask
        trace.cost[t] = cost
        trace.action[t] = a
        trace.reward[t] = r
        trace.psi[t] = psi
        t += 1
        counters.t = t
        if nu >= max(1, n_act[key] - nu):
            break
    return t - t0


def run(T: int, model: GenerativeModel, config: LearnerConfig, rng: np.random.Generator,
        state: Optional[SimOosState] = None, env: Optional[Environment] = None) -> RunTrace:
    """Run the learner online for ``T`` steps against ``model``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    state = SimOosState.for_model(model, config) if state is None else state
    env = Environment(model, rng, T) if env is None else env
    trace = RunTrace.allocate("sim-oos", config.beta, T)
    while state.counters.t < T:
        start_round(state)
        run_round(state, env, trace)
    trace.rounds = state.round_index
    return trace
