"""Optimistic learner that buys observations one at a time (sequential selection).

Each round solves an optimistic dynamic program over partial states,
layer by layer from ``|dom| = m`` down to the empty state, with upper-
confidence rewards at the leaves and L1-optimistic transition
distributions for every (partial state, observation) pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .environment import STOP, Environment, GenerativeModel, SeqPolicy, argmax_first
from .estimation import ConfidenceParams, CounterStore, LearnerConfig, conf2_seq
from .partial_state import MISSING, PartialState, StateSpace
from .solver import optimistic_value
from .trace import RunTrace


@dataclass
class OdpPlan:
    f_hat: Dict[PartialState, float]
    q_hat: Dict[Tuple[PartialState, Optional[int]], float]
    policy: SeqPolicy


class SeqOosState:
    def __init__(self, alphabets, n_actions: int, costs: Sequence[float], config: LearnerConfig):
        self.space = StateSpace(alphabets, config.m)
        self.A = n_actions
        self.costs = [float(c) for c in costs]
        self.config = config
        self.beta = config.beta
        self.m = config.m
        self.params = ConfidenceParams.for_space(self.space, n_actions, config.delta, config.radius_scale)
        self.counters = CounterStore(self.space.D, self.space)
        self.round_index = 0
        self.plan: Optional[OdpPlan] = None
        self.t_k = 1
        # (psi, i) -> {symbol: child}
        self.child_of = {
            key: dict(zip(self.space.alphabets[key[1]], kids)) for key, kids in self.space.children.items()
        }

    @classmethod
    def for_model(cls, model: GenerativeModel, config: LearnerConfig) -> "SeqOosState":
        return cls(model.alphabets, model.A, model.costs, config)


def odp_plan(counters: CounterStore, params: ConfidenceParams, beta: float, m: int,
             space: StateSpace, costs: Sequence[float], n_actions: int, t: Optional[int] = None) -> OdpPlan:
    """Optimistic backward induction over partial states with at most ``m`` observations.

    Stopping at ``psi`` is worth the best upper-confidence reward
    ``beta * (r_hat + conf1)``; observing ``i`` is worth ``-c_i`` plus the
    optimistic expectation of the child values. Ties prefer stopping, then
    the lowest observation id.
    """
    t = counters.t + 1 if t is None else t
    reward_log = params.log_reward_term(t)
    scale = params.scale
    n_act, sum_reward = counters.n_act, counters.sum_reward
    f_hat: Dict[PartialState, float] = {}
    q_hat: Dict[Tuple[PartialState, Optional[int]], float] = {}
    obs_fn: Dict[PartialState, Optional[int]] = {}
    action_fn: Dict[PartialState, int] = {}
    for depth in range(m, -1, -1):
        for psi in space.layers[depth]:
            ucb = []
            for a in range(n_actions):
                n = n_act.get((a, psi), 0)
                mean = sum_reward[(a, psi)] / n if n else 0.0
                radius = scale * min(1.0, math.sqrt(reward_log / (2.0 * max(1, n))))
                ucb.append(beta * mean + beta * radius)
            a_best = argmax_first(ucb)
            action_fn[psi] = a_best
            options: List[Optional[int]] = [STOP]
            q = [ucb[a_best]]
            q_hat[(psi, STOP)] = q[0]
            if depth < m:
                for i in range(space.D):
                    if psi[i] is not MISSING:
                        continue
                    kids = space.children[(psi, i)]
                    p_hat, n = counters.transition_estimate(psi, i, kids)
                    value = -costs[i] + optimistic_value(p_hat, [f_hat[c] for c in kids], conf2_seq(n, t, params))
                    q_hat[(psi, i)] = value
                    options.append(i)
                    q.append(value)
            k = argmax_first(q)
            f_hat[psi] = q[k]
            obs_fn[psi] = options[k]
    return OdpPlan(f_hat, q_hat, SeqPolicy(obs_fn, action_fn))


def start_round(state: SeqOosState) -> OdpPlan:
    state.plan = odp_plan(state.counters, state.params, state.beta, state.m, state.space, state.costs, state.A)
    state.round_index += 1
    state.t_k = state.counters.t + 1
    state.counters.start_round()
    return state.plan


def run_round_seq(state: SeqOosState, env: Environment, trace: RunTrace) -> int:
    """Follow the current plan until an in-round counter doubles. Returns steps taken."""
    obs_fn, action_fn = state.plan.policy.obs_fn, state.plan.policy.action_fn
    counters = state.counters
    costs, child_of, m = state.costs, state.child_of, state.m
    empty = state.space.empty
    n_trans_pair, n_trans, nu_trans = counters.n_trans_pair, counters.n_trans, counters.nu_trans
    n_act, sum_reward, nu_act = counters.n_act, counters.sum_reward, counters.nu_act
    state_idx, states, T = env.state_idx, env.states, min(env.horizon, trace.T)
    t0 = t = counters.t
    while t < T:
        phi = states[state_idx[t]]
        psi = empty
        cost = 0.0
        mask = 0
        done = False
        for _ in range(m):
            i = obs_fn[psi]
            if i is None:
                break
            nxt = child_of[(psi, i)][phi[i]]
            cost += costs[i]
            mask |= 1 << i
            pair = (psi, i)
            n_trans_pair[pair] += 1
            n_trans[(psi, i, nxt)] += 1
            nu = nu_trans[pair] + 1
            nu_trans[pair] = nu
            if nu >= max(1, n_trans_pair[pair] - nu):
                done = True
            psi = nxt
        a = action_fn[psi]
        r = env.reward(a, t)
        key = (a, psi)
        n_act[key] += 1
        sum_reward[key] += r
        nu = nu_act[key] + 1
        nu_act[key] = nu
        if nu >= max(1, n_act[key] - nu):
            done = True
        trace.obs_mask[t] = mask
        trace.cost[t] = cost
        trace.action[t] = a
        trace.reward[t] = r
        trace.psi[t] = psi
        t += 1
        counters.t = t
        if done:
            break
    return t - t0


def run_seq(T: int, model: GenerativeModel, config: LearnerConfig, rng: np.random.Generator,
            state: Optional[SeqOosState] = None, env: Optional[Environment] = None) -> RunTrace:
    """Run the sequential learner online for ``T`` steps against ``model``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    state = SeqOosState.for_model(model, config) if state is None else state
    env = Environment(model, rng, T) if env is None else env
    trace = RunTrace.allocate("seq-oos", config.beta, T)
    while state.counters.t < T:
        start_round(state)
        run_round_seq(state, env, trace)
    trace.rounds = state.round_index
    return trace
