"""Ground-truth generative model, samplers and exact oracles."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .partial_state import (
    MISSING,
    ObservationSet,
    PartialState,
    StateSpace,
    StateVector,
    enumerate_obs_sets,
    enumerate_partials,
)

STOP = None
REWARD_NOISE = ("bernoulli", "truncated-uniform")


def argmax_first(values: Sequence[float]) -> int:
    """Index of the first entry within rounding distance of the maximum."""
    best = max(values)
    tol = 1e-12 * max(1.0, abs(best))
    for k, v in enumerate(values):
        if v >= best - tol:
            return k
    raise ValueError("empty sequence")


@dataclass(frozen=True)
class SimPolicy:
    """Observe ``obs_set`` simultaneously, then act via ``action_map``."""

    obs_set: ObservationSet
    action_map: Dict[PartialState, int]


@dataclass(frozen=True)
class SeqPolicy:
    """Sequential policy: ``obs_fn`` picks the next observation or ``STOP``."""

    obs_fn: Dict[PartialState, Optional[int]]
    action_fn: Dict[PartialState, int]


@dataclass(frozen=True)
class OracleResult:
    value: float
    policy: Union[SimPolicy, SeqPolicy]
    values: Dict = field(default_factory=dict, repr=False)


class GenerativeModel:
    """Joint state distribution, mean-reward table and observation costs.

    Parameters
    ----------
    alphabets : sequence of sequences of int
        Symbol set of each observation.
    joint : array-like, shape (n_states,)
        Probability of every full state vector, in row-major order over
        ``alphabets`` (the last observation varies fastest).
    mean_reward : array-like, shape (n_actions, n_states)
        Expected reward of each action in each full state, in ``[0, 1]``.
    costs : array-like, shape (D,)
        Non-negative cost of each observation.
    reward_noise : {"bernoulli", "truncated-uniform"}
        Reward distribution around the mean.
    """

    def __init__(self, alphabets, joint, mean_reward, costs, reward_noise="bernoulli"):
        self.alphabets: Tuple[Tuple[int, ...], ...] = tuple(tuple(int(x) for x in a) for a in alphabets)
        self.D = len(self.alphabets)
        if any(len(a) == 0 or len(set(a)) != len(a) for a in self.alphabets):
            raise ValueError("alphabets must be non-empty and duplicate-free")
        self.states: List[StateVector] = [tuple(p) for p in itertools.product(*self.alphabets)]
        n = len(self.states)

        joint = np.asarray(joint, dtype=float).reshape(-1)
        if joint.shape != (n,):
            raise ValueError(f"joint has {joint.size} entries, expected {n}")
        if np.any(joint < 0) or abs(joint.sum() - 1.0) > 1e-12:
            raise ValueError("joint must be a probability vector (sums to 1 within 1e-12)")
        mean_reward = np.asarray(mean_reward, dtype=float)
        if mean_reward.ndim != 2 or mean_reward.shape[1] != n:
            raise ValueError(f"mean_reward must have shape (A, {n})")
        if np.any(mean_reward < 0) or np.any(mean_reward > 1):
            raise ValueError("mean rewards must lie in [0, 1]")
        costs = np.asarray(costs, dtype=float).reshape(-1)
        if costs.shape != (self.D,):
            raise ValueError(f"expected {self.D} costs, got {costs.size}")
        if np.any(costs < 0) or not np.all(np.isfinite(costs)):
            raise ValueError("costs must be finite and non-negative")
        if reward_noise not in REWARD_NOISE:
            raise ValueError(f"reward_noise must be one of {REWARD_NOISE}")

        self.joint = joint
        self.mean_reward = mean_reward
        self.costs = costs
        self.reward_noise = reward_noise
        self.A = mean_reward.shape[0]
        for arr in (self.joint, self.mean_reward, self.costs):
            arr.setflags(write=False)
        self._prob_cache: Dict[PartialState, float] = {}
        self._weighted_cache: Dict[PartialState, np.ndarray] = {}
        self._spaces: Dict[int, StateSpace] = {}

    def __repr__(self):
        return (f"GenerativeModel(D={self.D}, A={self.A}, n_states={len(self.states)}, "
                f"reward_noise={self.reward_noise!r})")

    @cached_property
    def state_array(self) -> np.ndarray:
        return np.asarray(self.states, dtype=np.int64).reshape(len(self.states), self.D)

    @cached_property
    def state_index(self) -> Dict[StateVector, int]:
        return {phi: k for k, phi in enumerate(self.states)}

    def space(self, m: int) -> StateSpace:
        if m not in self._spaces:
            self._spaces[m] = StateSpace(self.alphabets, m)
        return self._spaces[m]

    def with_costs(self, costs) -> "GenerativeModel":
        costs = np.broadcast_to(np.asarray(costs, dtype=float), (self.D,))
        return GenerativeModel(self.alphabets, self.joint, self.mean_reward, costs, self.reward_noise)

    def obs_cost(self, obs_set) -> float:
        return float(sum(self.costs[i] for i in obs_set))

    def _mask(self, psi: PartialState) -> np.ndarray:
        if len(psi) != self.D:
            raise ValueError("partial state has the wrong dimension")
        mask = np.ones(len(self.states), dtype=bool)
        S = self.state_array
        for i, x in enumerate(psi):
            if x is not MISSING:
                mask &= S[:, i] == x
        return mask

    def _weighted_reward(self, psi: PartialState) -> np.ndarray:
        """``sum over phi ~ psi of p(phi) * rbar(a, phi)`` for every action."""
        w = self._weighted_cache.get(psi)
        if w is None:
            mask = self._mask(psi)
            w = self.mean_reward[:, mask] @ self.joint[mask]
            self._weighted_cache[psi] = w
        return w


def sample_state(model: GenerativeModel, rng: np.random.Generator) -> StateVector:
    return model.states[sample_state_indices(model, rng, 1)[0]]


def sample_state_indices(model: GenerativeModel, rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.choice(len(model.states), size=size, p=model.joint)


def reward_from_uniform(rbar: float, u: float, noise: str = "bernoulli") -> float:
    """Turn a uniform draw into a reward with mean ``rbar`` and support in [0, 1]."""
    if noise == "bernoulli":
        return 1.0 if u < rbar else 0.0
    half_width = min(rbar, 1.0 - rbar)
    return rbar + half_width * (2.0 * u - 1.0)


def sample_reward(model: GenerativeModel, a: int, phi: StateVector, rng: np.random.Generator) -> float:
    rbar = model.mean_reward[a, model.state_index[tuple(phi)]]
    return reward_from_uniform(rbar, rng.random(), model.reward_noise)


def marginal_prob(model: GenerativeModel, psi: PartialState) -> float:
    p = model._prob_cache.get(psi)
    if p is None:
        p = float(model.joint[model._mask(psi)].sum())
        model._prob_cache[psi] = p
    return p


def marginal_reward(model: GenerativeModel, a: int, psi: PartialState) -> float:
    p = marginal_prob(model, psi)
    if p <= 0.0:
        raise ValueError(f"cannot condition on zero-probability partial state {psi}")
    return float(model._weighted_reward(psi)[a] / p)


def transition_prob(model: GenerativeModel, psi: PartialState, i: Optional[int], psi_next: PartialState) -> float:
    """Probability of reaching ``psi_next`` from ``psi`` by making observation ``i``.

    ``i = STOP`` leaves the partial state unchanged with probability 1.
    """
    if i is STOP:
        return 1.0 if psi_next == psi else 0.0
    p = marginal_prob(model, psi)
    if p <= 0.0:
        raise ValueError(f"cannot condition on zero-probability partial state {psi}")
    if psi[i] is not MISSING or psi_next[i] is MISSING:
        return 0.0
    if psi_next[:i] != psi[:i] or psi_next[i + 1:] != psi[i + 1:]:
        return 0.0
    return marginal_prob(model, psi_next) / p


def policy_gain_sim(model: GenerativeModel, policy: SimPolicy, beta: float) -> float:
    """Exact expected gain of a simultaneous policy."""
    total = 0.0
    for psi in enumerate_partials(policy.obs_set, model.alphabets):
        total += model._weighted_reward(psi)[policy.action_map[psi]]
    return beta * total - model.obs_cost(policy.obs_set)


def policy_gain_seq(model: GenerativeModel, policy: SeqPolicy, beta: float, m: int) -> float:
    """Exact expected gain of a sequential policy that may make at most ``m`` observations."""

    def walk(psi, depth):
        p = marginal_prob(model, psi)
        if p <= 0.0:
            return 0.0
        i = policy.obs_fn.get(psi, STOP) if depth < m else STOP
        if i is STOP:
            return beta * model._weighted_reward(psi)[policy.action_fn[psi]]
        total = -model.costs[i] * p
        for x in model.alphabets[i]:
            total += walk(psi[:i] + (x,) + psi[i + 1:], depth + 1)
        return total

    return float(walk((MISSING,) * model.D, 0))


def fixed_set_values(model: GenerativeModel, m: int, beta: float) -> Dict[ObservationSet, float]:
    """Value of observing each set and then acting optimally on every outcome."""
    out = {}
    for obs_set in enumerate_obs_sets(model.D, m):
        total = sum(model._weighted_reward(psi).max() for psi in enumerate_partials(obs_set, model.alphabets))
        out[obs_set] = beta * float(total) - model.obs_cost(obs_set)
    return out


def oracle_sim(model: GenerativeModel, m: int, beta: float) -> OracleResult:
    """Best simultaneous policy over observation sets of size at most ``m``.

    Ties go to the smaller set, then to the lexicographically first one.
    """
    values = fixed_set_values(model, m, beta)
    sets = list(values)
    best = sets[argmax_first([values[s] for s in sets])]
    action_map = {
        psi: argmax_first(list(model._weighted_reward(psi)))
        for psi in enumerate_partials(best, model.alphabets)
    }
    return OracleResult(values[best], SimPolicy(best, action_map), values)


def oracle_seq(model: GenerativeModel, m: int, beta: float) -> OracleResult:
    """Best sequential policy by backward induction over observation phases.

    Ties prefer stopping, then the lowest observation id.
    """
    space = model.space(m)
    F: Dict[PartialState, float] = {}
    obs_fn: Dict[PartialState, Optional[int]] = {}
    action_fn: Dict[PartialState, int] = {}
    for depth in range(m, -1, -1):
        for psi in space.layers[depth]:
            p = marginal_prob(model, psi)
            if p > 0.0:
                rewards = model._weighted_reward(psi) / p
                a = argmax_first(list(rewards))
                stop_value = beta * float(rewards[a])
            else:
                a, stop_value = 0, 0.0
            action_fn[psi] = a
            if depth == m or p <= 0.0:
                F[psi], obs_fn[psi] = stop_value, STOP
                continue
            options = [STOP]
            q = [stop_value]
            for i in range(model.D):
                if psi[i] is not MISSING:
                    continue
                cont = 0.0
                for child in space.children[(psi, i)]:
                    pc = marginal_prob(model, child)
                    if pc > 0.0:
                        cont += pc / p * F[child]
                options.append(i)
                q.append(-float(model.costs[i]) + cont)
            k = argmax_first(q)
            F[psi], obs_fn[psi] = q[k], options[k]
    return OracleResult(F[space.empty], SeqPolicy(obs_fn, action_fn), F)


# --------------------------------------------------------------------------
# model construction


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for :func:`make_synthetic_medical`.

    ``correlation`` scales pairwise coupling between observation levels;
    0 gives independent observations. ``temperature`` controls how sharply
    the reward separates the best treatment from the rest.
    """

    seed: int = 7
    alphabet_sizes: Tuple[int, ...] = (3, 2, 3, 2)
    n_actions: int = 4
    correlation: float = 1.0
    temperature: float = 0.15
    weight_scale: float = 1.0
    cost: float = 1.0
    reward_noise: str = "bernoulli"


def make_synthetic_medical(spec: Optional[SyntheticSpec] = None, **overrides) -> GenerativeModel:
    """Correlated four-test surrogate for a treatment-selection dataset.

    Observations stand for discretized age, estrogen receptor status, tumor
    stage and a performance score. Each treatment has a linear score in the
    normalized observation levels; the mean reward of a treatment is its
    softmax probability of being the best one, so the best treatment
    depends on the patient state.
    """
    spec = SyntheticSpec(**overrides) if spec is None else spec
    sizes = tuple(int(s) for s in spec.alphabet_sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"invalid alphabet sizes {spec.alphabet_sizes}")
    if spec.n_actions < 1:
        raise ValueError("need at least one action")
    if spec.temperature <= 0:
        raise ValueError("temperature must be positive")
    rng = np.random.default_rng(spec.seed)
    D = len(sizes)
    alphabets = [tuple(range(s)) for s in sizes]
    states = np.array(list(itertools.product(*alphabets)), dtype=float).reshape(-1, D)
    levels = states / np.maximum(np.array(sizes, dtype=float) - 1.0, 1.0)

    marginals = [rng.dirichlet(np.full(s, 4.0)) for s in sizes]
    log_p = np.zeros(len(states))
    for i, marg in enumerate(marginals):
        log_p += np.log(marg[states[:, i].astype(int)])
    coupling = np.zeros(len(states))
    for i, j in itertools.combinations(range(D), 2):
        coupling -= np.abs(levels[:, i] - levels[:, j])
    log_p += spec.correlation * coupling
    joint = np.exp(log_p - log_p.max())
    joint /= joint.sum()

    weights = rng.normal(0.0, spec.weight_scale, size=(spec.n_actions, D))
    bias = rng.normal(0.0, 0.1 * spec.weight_scale, size=spec.n_actions)
    scores = bias[:, None] + weights @ (levels - 0.5).T
    z = scores / spec.temperature
    z -= z.max(axis=0, keepdims=True)
    mean_reward = np.exp(z)
    mean_reward /= mean_reward.sum(axis=0, keepdims=True)
    return GenerativeModel(alphabets, joint, mean_reward, np.full(D, spec.cost), spec.reward_noise)


def make_random_model(rng: np.random.Generator, alphabet_sizes: Sequence[int], n_actions: int,
                      cost_range=(0.0, 0.3), reward_noise: str = "bernoulli") -> GenerativeModel:
    """Model with a Dirichlet joint, uniform mean rewards and uniform costs."""
    alphabets = [tuple(range(s)) for s in alphabet_sizes]
    n = int(np.prod(alphabet_sizes)) if len(alphabet_sizes) else 1
    joint = rng.dirichlet(np.ones(n))
    joint /= joint.sum()
    mean_reward = rng.random((n_actions, n))
    costs = rng.uniform(*cost_range, size=len(alphabet_sizes))
    return GenerativeModel(alphabets, joint, mean_reward, costs, reward_noise)


def make_parity_model(cost: float = 0.05, reward_gap: float = 0.8, n_distractors: int = 1,
                      reward_noise: str = "bernoulli") -> GenerativeModel:
    """Two binary tests whose parity decides which of two actions is right.

    Any further observations are independent distractors. Acting on the
    parity earns ``(1 + reward_gap) / 2`` in expectation, acting blind 1/2.
    """
    D = 2 + n_distractors
    alphabets = [(0, 1)] * D
    states = list(itertools.product(*alphabets))
    hi = (1.0 + reward_gap) / 2.0
    mean_reward = np.empty((2, len(states)))
    for k, phi in enumerate(states):
        best = phi[0] ^ phi[1]
        mean_reward[best, k] = hi
        mean_reward[1 - best, k] = 1.0 - hi
    joint = np.full(len(states), 1.0 / len(states))
    return GenerativeModel(alphabets, joint, mean_reward, np.full(D, cost), reward_noise)


def make_switch_model(cost: float = 0.02, reward_gap: float = 0.8,
                      reward_noise: str = "bernoulli") -> GenerativeModel:
    """Three binary tests: the first decides whether the second or third one matters.

    A sequential policy needs two observations where a simultaneous one
    needs three, so sequential selection is strictly better here.
    """
    alphabets = [(0, 1)] * 3
    states = list(itertools.product(*alphabets))
    hi = (1.0 + reward_gap) / 2.0
    mean_reward = np.empty((2, len(states)))
    for k, (x0, x1, x2) in enumerate(states):
        best = x1 if x0 == 0 else x2
        mean_reward[best, k] = hi
        mean_reward[1 - best, k] = 1.0 - hi
    joint = np.full(len(states), 1.0 / len(states))
    return GenerativeModel(alphabets, joint, mean_reward, np.full(3, cost), reward_noise)


# --------------------------------------------------------------------------
# persistence


def model_to_dict(model: GenerativeModel) -> dict:
    return {
        "alphabets": [list(a) for a in model.alphabets],
        "joint": [float(x) for x in model.joint],
        "mean_reward": [[float(x) for x in row] for row in model.mean_reward],
        "costs": [float(x) for x in model.costs],
        "reward_noise": model.reward_noise,
    }


def model_from_dict(data: dict) -> GenerativeModel:
    unknown = set(data) - {"alphabets", "joint", "mean_reward", "costs", "reward_noise"}
    if unknown:
        raise ValueError(f"unknown model keys: {sorted(unknown)}")
    return GenerativeModel(data["alphabets"], data["joint"], data["mean_reward"], data["costs"],
                           data.get("reward_noise", "bernoulli"))


def save_model(model: GenerativeModel, path) -> None:
    # json writes floats with repr(), the shortest exact round-trip form
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path) -> GenerativeModel:
    return model_from_dict(json.loads(Path(path).read_text()))


class Environment:
    """One seeded realization of the i.i.d. state and reward streams.

    States and reward uniforms for the whole horizon are drawn up front, so
    every learner run against the same seed sees the same patients.
    """

    def __init__(self, model: GenerativeModel, rng: np.random.Generator, horizon: int):
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        self.model = model
        self.horizon = horizon
        self.state_idx: List[int] = sample_state_indices(model, rng, horizon).tolist()
        self.uniforms: List[float] = rng.random(horizon).tolist()
        self.rewards: List[List[float]] = model.mean_reward.tolist()
        self.states = model.states
        self.noise = model.reward_noise

    def reward(self, a: int, t: int) -> float:
        rbar = self.rewards[a][self.state_idx[t]]
        if self.noise == "bernoulli":
            return 1.0 if self.uniforms[t] < rbar else 0.0
        return reward_from_uniform(rbar, self.uniforms[t], self.noise)
