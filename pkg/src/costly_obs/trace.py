"""Per-step run logs and the Gain / regret metrics computed from them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .partial_state import PartialState


@dataclass
class RunTrace:
    """Step-by-step record of one online run.

    ``obs_mask[t]`` is the bitmask of observations bought at step ``t + 1``
    (bit ``i`` set for observation ``i``).
    """

    algorithm: str
    beta: float
    obs_mask: np.ndarray
    cost: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    psi: List[PartialState] = field(default_factory=list, repr=False)
    rounds: int = 0

    @classmethod
    def allocate(cls, algorithm: str, beta: float, T: int) -> "RunTrace":
        return cls(algorithm, float(beta), np.zeros(T, dtype=np.int64), np.zeros(T), np.zeros(T, dtype=np.int64),
                   np.zeros(T), [None] * T)

    @property
    def T(self) -> int:
        return len(self.reward)

    def step_gain(self) -> np.ndarray:
        return self.beta * self.reward - self.cost

    def n_observations(self) -> np.ndarray:
        return np.array([bin(int(m)).count("1") for m in self.obs_mask], dtype=np.int64)


def compute_gain(trace: RunTrace, beta: Optional[float] = None) -> float:
    """Time-averaged ``beta * r_t`` minus the observation cost paid."""
    beta = trace.beta if beta is None else beta
    return float(np.sum(beta * trace.reward - trace.cost) / trace.T)


def compute_regret(trace: RunTrace, oracle_value: float, beta: Optional[float] = None) -> float:
    beta = trace.beta if beta is None else beta
    return float(trace.T * oracle_value - np.sum(beta * trace.reward - trace.cost))


def regret_curve(trace: RunTrace, oracle_value: float) -> np.ndarray:
    """Cumulative regret after each step."""
    t = np.arange(1, trace.T + 1)
    return t * oracle_value - np.cumsum(trace.step_gain())


def log_checkpoints(T: int, n_points: int = 1000) -> np.ndarray:
    """At most ``n_points`` log-spaced step indices in ``1..T``, always including ``T``."""
    if T <= n_points:
        return np.arange(1, T + 1)
    pts = np.unique(np.round(np.logspace(0, np.log10(T), n_points)).astype(np.int64))
    pts = pts[(pts >= 1) & (pts <= T)]
    if pts[-1] != T:
        pts = np.append(pts, T)
    return pts
