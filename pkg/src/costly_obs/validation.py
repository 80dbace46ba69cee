"""Input validation helpers shared by the estimators and the harness."""
from __future__ import annotations

import numbers
from typing import List

import numpy as np

from .environment import GenerativeModel
from .partial_state import MISSING, PartialState


def check_generator(random_state) -> np.random.Generator:
    """Turn ``None``, an int seed or a Generator into a Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    if random_state is None or isinstance(random_state, (numbers.Integral, np.integer)):
        return np.random.default_rng(random_state)
    raise ValueError(f"{random_state!r} cannot be used to seed a numpy Generator")


def check_model(model) -> GenerativeModel:
    if not isinstance(model, GenerativeModel):
        raise TypeError(f"expected a GenerativeModel, got {type(model).__name__}")
    return model


def check_budget(m, D: int) -> int:
    if not isinstance(m, (numbers.Integral, np.integer)) or not 0 <= m <= D:
        raise ValueError(f"observation budget m must be an integer in [0, {D}], got {m!r}")
    return int(m)


def check_horizon(T) -> int:
    if not isinstance(T, (numbers.Integral, np.integer)) or T < 1:
        raise ValueError(f"horizon must be a positive integer, got {T!r}")
    return int(T)


def check_partial_states(X, alphabets) -> List[PartialState]:
    """Convert rows with ``NaN`` (or ``None``) for unobserved entries into partial states."""
    D = len(alphabets)
    rows = X.tolist() if isinstance(X, np.ndarray) else [list(r) for r in X]
    out = []
    for r, row in enumerate(rows):
        if len(row) != D:
            raise ValueError(f"row {r} has {len(row)} entries, expected {D}")
        psi = []
        for i, x in enumerate(row):
            if x is None or (isinstance(x, float) and np.isnan(x)):
                psi.append(MISSING)
                continue
            if float(x) != int(x) or int(x) not in alphabets[i]:
                raise ValueError(f"row {r}: symbol {x!r} not in alphabet of observation {i}")
            psi.append(int(x))
        out.append(tuple(psi))
    return out
