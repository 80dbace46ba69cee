"""Visit counters, empirical estimates and confidence radii."""
from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from .partial_state import MISSING, ObservationSet, PartialState, StateSpace, domain, substates


@dataclass(frozen=True)
class ConfidenceParams:
    """Constants entering the confidence radii.

    ``scale`` multiplies every radius; 1 gives the theoretical radii and 0
    turns the learners into plug-in (certainty-equivalent) planners.
    """

    delta: float
    psi_tot: int
    psi_max: int
    A: int
    D: int
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.scale < 0:
            raise ValueError("scale must be non-negative")

    @classmethod
    def for_space(cls, space: StateSpace, A: int, delta: float, scale: float = 1.0) -> "ConfidenceParams":
        return cls(delta=delta, psi_tot=space.psi_tot, psi_max=space.psi_max, A=A, D=space.D, scale=scale)

    def log_reward_term(self, t: int) -> float:
        return math.log(20.0 * self.psi_tot * self.A / self.delta) + 5.0 * math.log(t)

    def log_sim_term(self, t: int) -> float:
        return math.log(4.0 * t / self.delta)

    def log_seq_term(self, t: int) -> float:
        return math.log(4.0 * self.D * self.psi_tot * t / self.delta)


def _check_t(t):
    if t < 1:
        raise ValueError("t must be >= 1")


def conf1(n: int, t: int, params: ConfidenceParams) -> float:
    """Reward radius ``min(1, sqrt(log(20 Psi_tot A t^5 / delta) / (2 max(1, n))))``."""
    _check_t(t)
    return params.scale * min(1.0, math.sqrt(params.log_reward_term(t) / (2.0 * max(1, n))))


def conf2_sim(n: int, t: int, params: ConfidenceParams) -> float:
    """L1 radius for observation-set distributions; 2 (the whole simplex) when ``n = 0``."""
    _check_t(t)
    if n == 0:
        return 2.0 * params.scale
    return params.scale * min(1.0, math.sqrt(10.0 * params.psi_tot * params.log_sim_term(t) / n))


def conf2_seq(n: int, t: int, params: ConfidenceParams) -> float:
    """L1 radius for one-step transition distributions; 2 when ``n = 0``."""
    _check_t(t)
    if n == 0:
        return 2.0 * params.scale
    return params.scale * min(1.0, math.sqrt(10.0 * params.psi_max * params.log_seq_term(t) / n))


class CounterStore:
    """Sufficient statistics for every estimate used by the learners.

    Keys are canonical partial states, so counters are created lazily and
    only visited states take memory. ``nu_*`` are the in-round visit counts
    and are cleared by :meth:`start_round`.
    """

    def __init__(self, D: int, space: Optional[StateSpace] = None):
        self.D = D
        self.n_obs_set: Dict[ObservationSet, int] = defaultdict(int)
        self.n_obs_partial: Dict[PartialState, int] = defaultdict(int)
        self.n_act: Dict[Tuple[int, PartialState], int] = defaultdict(int)
        self.sum_reward: Dict[Tuple[int, PartialState], float] = defaultdict(float)
        self.n_trans_pair: Dict[Tuple[PartialState, int], int] = defaultdict(int)
        self.n_trans: Dict[Tuple[PartialState, int, PartialState], int] = defaultdict(int)
        self.nu_act: Dict[Tuple[int, PartialState], int] = defaultdict(int)
        self.nu_trans: Dict[Tuple[PartialState, int], int] = defaultdict(int)
        self.t = 0
        self._substates = space.substate_table if space is not None else {}

    def start_round(self):
        self.nu_act.clear()
        self.nu_trans.clear()

    def _subs(self, psi):
        subs = self._substates.get(psi)
        if subs is None:
            subs = [(domain(s), s) for s in substates(psi)]
        return subs

    def record_observation(self, psi: PartialState, count: int = 1):
        for dom, sub in self._subs(psi):
            self.n_obs_partial[sub] += count
            self.n_obs_set[dom] += count

    def record_reward(self, a: int, psi: PartialState, r: float):
        key = (a, psi)
        self.n_act[key] += 1
        self.sum_reward[key] += r
        self.nu_act[key] += 1

    def record_sim_step(self, obs_set: ObservationSet, psi: PartialState, a: int, r: float):
        """One simultaneous-observation step.

        Observation counters are credited to every substate of ``psi``;
        the reward only to the exact pair ``(a, psi)``.
        """
        if domain(psi) != tuple(sorted(obs_set)):
            raise ValueError(f"partial state {psi} does not have domain {obs_set}")
        self.record_observation(psi)
        self.record_reward(a, psi, r)
        self.t += 1

    def record_sim_batch(self, obs_set: ObservationSet, psis: Sequence[PartialState],
                         actions: Sequence[int], rewards: Sequence[float]):
        """Aggregate form of repeated :meth:`record_sim_step` calls (in-round counts included)."""
        target = tuple(sorted(obs_set))
        obs = Counter(psis)
        for psi, cnt in obs.items():
            if domain(psi) != target:
                raise ValueError(f"partial state {psi} does not have domain {obs_set}")
            self.record_observation(psi, cnt)
        sums: Dict[Tuple[int, PartialState], float] = defaultdict(float)
        cnts: Dict[Tuple[int, PartialState], int] = defaultdict(int)
        for psi, a, r in zip(psis, actions, rewards):
            key = (int(a), psi)
            cnts[key] += 1
            sums[key] += float(r)
        for key, c in cnts.items():
            self.n_act[key] += c
            self.sum_reward[key] += sums[key]
            self.nu_act[key] += c
        self.t += len(psis)

    def record_seq_phase(self, psi: PartialState, i: Optional[int], psi_next: PartialState):
        """One observation phase of a sequential step. ``STOP`` phases are ignored."""
        if i is None:
            if psi_next != psi:
                raise ValueError("a STOP phase cannot change the partial state")
            return
        if psi[i] is not MISSING or psi_next[i] is MISSING:
            raise ValueError(f"inconsistent transition {psi} --{i}--> {psi_next}")
        if psi_next[:i] != psi[:i] or psi_next[i + 1:] != psi[i + 1:]:
            raise ValueError(f"inconsistent transition {psi} --{i}--> {psi_next}")
        self.n_trans_pair[(psi, i)] += 1
        self.n_trans[(psi, i, psi_next)] += 1
        self.nu_trans[(psi, i)] += 1

    # in-round stopping rule: a counter has matched its count from before the round
    def act_round_full(self, a: int, psi: PartialState) -> bool:
        nu = self.nu_act.get((a, psi), 0)
        return nu >= max(1, self.n_act.get((a, psi), 0) - nu)

    def trans_round_full(self, psi: PartialState, i: int) -> bool:
        nu = self.nu_trans.get((psi, i), 0)
        return nu >= max(1, self.n_trans_pair.get((psi, i), 0) - nu)

    def reward_estimate(self, a: int, psi: PartialState) -> Tuple[float, int]:
        n = self.n_act.get((a, psi), 0)
        if n == 0:
            return 0.0, 0
        return self.sum_reward[(a, psi)] / n, n

    def prob_estimate(self, psi: PartialState, n_outcomes: int) -> Tuple[float, int]:
        """Empirical probability of ``psi`` among partial states with its domain.

        ``n_outcomes`` is ``|Psi+(dom(psi))|`` and sets the uniform default
        used before the domain has been observed.
        """
        n = self.n_obs_set.get(domain(psi), 0)
        if n == 0:
            return 1.0 / n_outcomes, 0
        return self.n_obs_partial.get(psi, 0) / n, n

    def transition_estimate(self, psi: PartialState, i: int, children: Sequence[PartialState]):
        """Empirical distribution over ``children`` after observing ``i`` at ``psi``."""
        n = self.n_trans_pair.get((psi, i), 0)
        if n == 0:
            return [1.0 / len(children)] * len(children), 0
        return [self.n_trans.get((psi, i, c), 0) / n for c in children], n

    def dump(self) -> str:
        """Deterministic JSON snapshot, for debugging and golden tests."""

        def table(d):
            return {repr(k): d[k] for k in sorted(d, key=repr) if d[k]}

        return json.dumps({
            "t": self.t,
            "n_obs_set": table(self.n_obs_set),
            "n_obs_partial": table(self.n_obs_partial),
            "n_act": table(self.n_act),
            "sum_reward": table(self.sum_reward),
            "n_trans_pair": table(self.n_trans_pair),
            "n_trans": table(self.n_trans),
        }, indent=1, sort_keys=True)


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters shared by the optimistic learners."""

    m: int
    beta: float = 1.0
    delta: float = 0.1
    radius_scale: float = 1.0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be non-negative")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
