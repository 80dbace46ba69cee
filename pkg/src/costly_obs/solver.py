"""Linear maximization over an L1 ball intersected with the probability simplex."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class L1BallProblem:
    p_hat: Sequence[float]
    values: Sequence[float]
    radius: float

    def __post_init__(self):
        if len(self.p_hat) != len(self.values):
            raise ValueError("p_hat and values must have the same length")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if abs(sum(self.p_hat) - 1.0) > 1e-9 or min(self.p_hat) < 0:
            raise ValueError("p_hat must lie on the probability simplex")


def _greedy(p_hat: Sequence[float], values: Sequence[float], radius: float) -> Tuple[List[float], float]:
    k = len(values)
    best = 0
    for j in range(1, k):
        if values[j] > values[best]:
            best = j
    q = [float(x) for x in p_hat]
    add = min(radius / 2.0, 1.0 - q[best])
    if add > 0.0:
        q[best] += add
        remaining = add
        # drain lowest values first; ties by lowest index
        for j in sorted(range(k), key=lambda j: (values[j], j)):
            if j == best:
                continue
            take = q[j] if q[j] < remaining else remaining
            q[j] -= take
            remaining -= take
            if remaining <= 0.0:
                break
        if remaining > 0.0:
            # every other entry is empty; absorb rounding residue
            q[best] = 1.0
    value = 0.0
    for qj, vj in zip(q, values):
        value += qj * vj
    return q, value


def optimistic_value(p_hat: Sequence[float], values: Sequence[float], radius: float) -> float:
    """Value-only form of :func:`l1_linear_max` for the planners' inner loops."""
    if len(values) == 1:
        return float(values[0])
    return _greedy(p_hat, values, radius)[1]


def l1_linear_max(problem: L1BallProblem) -> Tuple[np.ndarray, float]:
    """Maximize ``p @ values`` over ``{p in simplex : ||p - p_hat||_1 <= radius}``.

    Moves ``min(radius / 2, 1 - p_hat[j*])`` mass onto the highest-value
    outcome ``j*`` (lowest index on ties) and removes the same mass from the
    lowest-value outcomes first. This is an exact maximizer for a linear
    objective.

    Returns
    -------
    p_tilde : ndarray
        The maximizing distribution.
    value : float
        ``p_tilde @ values``.
    """
    q, value = _greedy(problem.p_hat, problem.values, problem.radius)
    return np.asarray(q), value
