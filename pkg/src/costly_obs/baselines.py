"""Comparison learners: full-observation contextual UCB, meta-action UCB, uniform random."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .environment import Environment, GenerativeModel, SimPolicy
from .partial_state import StateSpace, enumerate_obs_sets, enumerate_partials, to_bitmask
from .trace import RunTrace

MAX_META_ARMS = 10_000


class PolicySpaceOverflow(ValueError):
    """Raised when the meta-action reduction would need too many arms."""


@dataclass
class UcbArmStats:
    pulls: int = 0
    mean: float = 0.0

    def update(self, x: float):
        self.pulls += 1
        self.mean += (x - self.mean) / self.pulls


def ucb1_choice(stats: List[UcbArmStats], t: int) -> int:
    """UCB1 index ``mean + sqrt(2 ln t / pulls)``; untried arms first, lowest index on ties."""
    best, best_index = 0, -math.inf
    log_t = math.log(t)
    for k, s in enumerate(stats):
        if s.pulls == 0:
            return k
        index = s.mean + math.sqrt(2.0 * log_t / s.pulls)
        if index > best_index:
            best, best_index = k, index
    return best


def contextual_ucb_run(T: int, model: GenerativeModel, beta: float, rng: np.random.Generator,
                       env: Optional[Environment] = None) -> RunTrace:
    """Buy every observation each step and run UCB1 separately in every full state."""
    env = Environment(model, rng, T) if env is None else env
    trace = RunTrace.allocate("contextual-ucb", beta, T)
    cost = float(model.costs.sum())
    mask = to_bitmask(range(model.D))
    stats = [[UcbArmStats() for _ in range(model.A)] for _ in model.states]
    trace.cost[:] = cost
    trace.obs_mask[:] = mask
    for t in range(T):
        k = env.state_idx[t]
        arms = stats[k]
        a = ucb1_choice(arms, t + 1)
        r = env.reward(a, t)
        arms[a].update(r)
        trace.action[t] = a
        trace.reward[t] = r
        trace.psi[t] = env.states[k]
    return trace


def count_policies(alphabets, n_actions: int, m: int) -> int:
    """Number of simultaneous policies ``sum over I of A ** |Psi+(I)|``."""
    total = 0
    for obs_set in enumerate_obs_sets(len(alphabets), m):
        total += n_actions ** math.prod(len(alphabets[i]) for i in obs_set)
    return total


def enumerate_sim_policies(alphabets, n_actions: int, m: int, limit: int = MAX_META_ARMS) -> List[SimPolicy]:
    """Every (observation set, action map) pair, or :class:`PolicySpaceOverflow`."""
    n = count_policies(alphabets, n_actions, m)
    if n > limit:
        raise PolicySpaceOverflow(f"{n} meta-actions exceed the limit of {limit}")
    out = []
    for obs_set in enumerate_obs_sets(len(alphabets), m):
        psis = enumerate_partials(obs_set, alphabets)
        for acts in itertools.product(range(n_actions), repeat=len(psis)):
            out.append(SimPolicy(obs_set, dict(zip(psis, acts))))
    return out


def meta_ucb_run(T: int, model: GenerativeModel, beta: float, m: int, rng: np.random.Generator,
                 env: Optional[Environment] = None, limit: int = MAX_META_ARMS) -> RunTrace:
    """UCB1 with one arm per simultaneous policy, costs folded into the reward.

    The reward ``beta * r - cost`` is mapped affinely from
    ``[-sum(costs), beta]`` onto ``[0, 1]``.
    """
    return _meta_ucb(T, model, beta, m, rng, env, limit)[0]


def _meta_ucb(T, model, beta, m, rng, env=None, limit=MAX_META_ARMS):
    policies = enumerate_sim_policies(model.alphabets, model.A, m, limit)
    env = Environment(model, rng, T) if env is None else env
    space = StateSpace(model.alphabets, m)
    trace = RunTrace.allocate("meta-ucb", beta, T)
    low = -float(model.costs.sum())
    span = beta - low
    stats = [UcbArmStats() for _ in policies]
    costs = [model.obs_cost(p.obs_set) for p in policies]
    masks = [to_bitmask(p.obs_set) for p in policies]
    for t in range(T):
        k = ucb1_choice(stats, t + 1)
        policy = policies[k]
        psi = space.reveal_table(policy.obs_set)[env.state_idx[t]]
        a = policy.action_map[psi]
        r = env.reward(a, t)
        stats[k].update((beta * r - costs[k] - low) / span)
        trace.obs_mask[t] = masks[k]
        trace.cost[t] = costs[k]
        trace.action[t] = a
        trace.reward[t] = r
        trace.psi[t] = psi
    return trace, policies, stats


def uniform_random_run(T: int, model: GenerativeModel, beta: float, m: int, rng: np.random.Generator,
                       env: Optional[Environment] = None) -> RunTrace:
    """Uniformly random observation set (size at most ``m``) and action every step."""
    env = Environment(model, rng, T) if env is None else env
    space = StateSpace(model.alphabets, m)
    sets = space.obs_sets
    trace = RunTrace.allocate("uniform-random", beta, T)
    set_draws = rng.integers(len(sets), size=T)
    action_draws = rng.integers(model.A, size=T)
    for t in range(T):
        obs_set = sets[set_draws[t]]
        a = int(action_draws[t])
        psi = space.reveal_table(obs_set)[env.state_idx[t]]
        trace.obs_mask[t] = to_bitmask(obs_set)
        trace.cost[t] = model.obs_cost(obs_set)
        trace.action[t] = a
        trace.reward[t] = env.reward(a, t)
        trace.psi[t] = psi
    return trace
