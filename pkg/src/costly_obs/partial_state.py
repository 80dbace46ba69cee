"""Full and partial state vectors over a finite set of costly observations.

A state vector is a length-``D`` tuple of integer symbols, one per observation.
A partial state is a length-``D`` tuple in which unobserved entries are
``None``. Using a plain tuple keeps equality, hashing and ordering canonical
and makes partial states cheap dictionary keys in the hot loops.

Observation ids are 0-based.
"""
from __future__ import annotations

import itertools
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

MISSING = None

StateVector = Tuple[int, ...]
PartialState = Tuple[Optional[int], ...]
ObservationSet = Tuple[int, ...]
Alphabets = Tuple[Tuple[int, ...], ...]


def empty_partial(D: int) -> PartialState:
    return (MISSING,) * D


def make_partial(entries: Dict[int, int], D: int, alphabets: Optional[Sequence[Sequence[int]]] = None) -> PartialState:
    """Build a partial state from an ``{observation id: symbol}`` mapping."""
    psi = [MISSING] * D
    for i, x in entries.items():
        if not 0 <= i < D:
            raise ValueError(f"observation id {i} outside 0..{D - 1}")
        if alphabets is not None and x not in alphabets[i]:
            raise ValueError(f"symbol {x!r} not in alphabet of observation {i}")
        psi[i] = x
    return tuple(psi)


def domain(psi: PartialState) -> ObservationSet:
    return tuple(i for i, x in enumerate(psi) if x is not MISSING)


def is_consistent(phi: Sequence[int], psi: PartialState) -> bool:
    """True iff ``phi`` agrees with ``psi`` everywhere on the domain of ``psi``."""
    if len(phi) != len(psi):
        raise ValueError(f"dimension mismatch: state has {len(phi)} entries, partial state {len(psi)}")
    return all(x is MISSING or x == y for x, y in zip(psi, phi))


def is_substate(big: PartialState, small: PartialState) -> bool:
    """True iff ``small`` is a restriction of ``big`` (``big`` ⪰ ``small``)."""
    if len(big) != len(small):
        raise ValueError("dimension mismatch")
    return all(s is MISSING or s == b for b, s in zip(big, small))


def substates(psi: PartialState) -> List[PartialState]:
    """All restrictions of ``psi`` to subsets of its domain, ``psi`` itself included.

    Ordered by subset size, then lexicographically by the retained ids.
    """
    dom = domain(psi)
    out = []
    for size in range(len(dom) + 1):
        for keep in itertools.combinations(dom, size):
            kept = set(keep)
            out.append(tuple(x if i in kept else MISSING for i, x in enumerate(psi)))
    return out


def extend(psi: PartialState, i: int, x: int) -> PartialState:
    """Reveal observation ``i`` with symbol ``x``."""
    if psi[i] is not MISSING:
        raise ValueError(f"observation {i} already present in partial state {psi}")
    return psi[:i] + (x,) + psi[i + 1:]


def restrict(phi: Sequence[int], obs_set: Iterable[int]) -> PartialState:
    """The partial state revealed by observing ``obs_set`` on the full state ``phi``."""
    keep = set(obs_set)
    return tuple(x if i in keep else MISSING for i, x in enumerate(phi))


def enumerate_partials(obs_set: ObservationSet, alphabets: Sequence[Sequence[int]]) -> List[PartialState]:
    """Every partial state whose domain is exactly ``obs_set``.

    Symbols vary fastest in the highest id, matching row-major order.
    """
    D = len(alphabets)
    out = []
    for combo in itertools.product(*(alphabets[i] for i in obs_set)):
        psi = [MISSING] * D
        for i, x in zip(obs_set, combo):
            psi[i] = x
        out.append(tuple(psi))
    return out


def enumerate_obs_sets(D: int, m: int) -> List[ObservationSet]:
    """All subsets of ``range(D)`` with at most ``m`` members, smallest first.

    The order doubles as the tie-breaking order for every argmax over
    observation sets in this package.
    """
    if not 0 <= m <= D:
        raise ValueError(f"need 0 <= m <= D, got m={m}, D={D}")
    return [s for size in range(m + 1) for s in itertools.combinations(range(D), size)]


def to_bitmask(obs_set: Iterable[int]) -> int:
    mask = 0
    for i in obs_set:
        mask |= 1 << i
    return mask


def from_bitmask(mask: int) -> ObservationSet:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


class StateSpace:
    """Precomputed combinatorics for a fixed alphabet tuple and observation budget.

    Everything here is derived once and shared (read-only) by the oracles,
    planners and simulators.
    """

    def __init__(self, alphabets: Sequence[Sequence[int]], m: int):
        self.alphabets: Alphabets = tuple(tuple(int(x) for x in a) for a in alphabets)
        self.D = len(self.alphabets)
        if not 0 <= m <= self.D:
            raise ValueError(f"need 0 <= m <= D, got m={m}, D={self.D}")
        self.m = m
        self.obs_sets = enumerate_obs_sets(self.D, m)
        self.partials: Dict[ObservationSet, List[PartialState]] = {
            s: enumerate_partials(s, self.alphabets) for s in self.obs_sets
        }
        self.empty = empty_partial(self.D)

    @cached_property
    def states(self) -> List[StateVector]:
        return [tuple(p) for p in itertools.product(*self.alphabets)]

    @cached_property
    def state_index(self) -> Dict[StateVector, int]:
        return {phi: k for k, phi in enumerate(self.states)}

    @property
    def psi_tot(self) -> int:
        return sum(len(v) for v in self.partials.values())

    @property
    def psi_max(self) -> int:
        return max((len(a) for a in self.alphabets), default=1)

    @cached_property
    def layers(self) -> List[List[PartialState]]:
        """Partial states grouped by domain size ``0..m``."""
        out: List[List[PartialState]] = [[] for _ in range(self.m + 1)]
        for s in self.obs_sets:
            out[len(s)].extend(self.partials[s])
        return out

    @cached_property
    def substate_table(self) -> Dict[PartialState, List[Tuple[ObservationSet, PartialState]]]:
        """For every partial state with ``|dom| <= m``: its (domain, substate) pairs."""
        table = {}
        for s in self.obs_sets:
            for psi in self.partials[s]:
                table[psi] = [(domain(sub), sub) for sub in substates(psi)]
        return table

    @cached_property
    def children(self) -> Dict[Tuple[PartialState, int], Tuple[PartialState, ...]]:
        """One-step extensions of every partial state with ``|dom| < m``."""
        table = {}
        for layer in self.layers[:self.m]:
            for psi in layer:
                for i in range(self.D):
                    if psi[i] is MISSING:
                        table[(psi, i)] = tuple(extend(psi, i, x) for x in self.alphabets[i])
        return table

    def reveal_table(self, obs_set: ObservationSet) -> List[PartialState]:
        """``reveal_table(I)[k]`` is the partial state seen when observing ``I`` on state ``k``."""
        cache = self.__dict__.setdefault("_reveal", {})
        if obs_set not in cache:
            cache[obs_set] = [restrict(phi, obs_set) for phi in self.states]
        return cache[obs_set]
