import math

import pytest
from hypothesis import given, strategies as st

from costly_obs.partial_state import (
    MISSING,
    StateSpace,
    domain,
    empty_partial,
    enumerate_obs_sets,
    enumerate_partials,
    extend,
    from_bitmask,
    is_consistent,
    is_substate,
    make_partial,
    restrict,
    substates,
    to_bitmask,
)

# symbols -1 / 1 as in the three-test running example; ids are 0-based
PSI1 = (-1, MISSING, -1)
PSI2 = (-1, MISSING, MISSING)
PHI = (-1, 1, 1)


def test_domain():
    assert domain(PSI1) == (0, 2)
    assert domain(empty_partial(3)) == ()
    assert domain((0, 1, 0)) == (0, 1, 2)


def test_consistency():
    assert is_consistent(PHI, PSI2)
    assert not is_consistent(PHI, PSI1)
    assert is_consistent(PHI, empty_partial(3))
    with pytest.raises(ValueError):
        is_consistent((0, 1), PSI1)


def test_substate():
    assert is_substate(PSI1, PSI2)
    assert not is_substate(PSI2, PSI1)
    assert is_substate(PSI1, empty_partial(3))
    assert not is_substate((0, MISSING), (1, MISSING))


def test_substates_order():
    assert substates(PSI1) == [(None, None, None), (-1, None, None), (None, None, -1), (-1, None, -1)]
    assert substates(empty_partial(2)) == [(None, None)]


def test_extend():
    assert extend((0, MISSING), 1, 1) == (0, 1)
    assert extend(empty_partial(2), 0, -1) == (-1, MISSING)
    with pytest.raises(ValueError):
        extend((0, MISSING), 0, 1)


def test_make_partial():
    assert make_partial({1: 0}, 3) == (MISSING, 0, MISSING)
    with pytest.raises(ValueError):
        make_partial({3: 0}, 3)
    with pytest.raises(ValueError):
        make_partial({0: 5}, 2, [(0, 1), (0, 1)])


def test_enumerate_partials():
    ab = [(0, 1), (0, 1)]
    assert enumerate_partials((0,), ab) == [(0, None), (1, None)]
    assert enumerate_partials((), ab) == [(None, None)]
    assert len(enumerate_partials((0, 1), ab)) == 4


def test_enumerate_obs_sets():
    assert enumerate_obs_sets(3, 1) == [(), (0,), (1,), (2,)]
    assert len(enumerate_obs_sets(4, 3)) == 15
    assert len(enumerate_obs_sets(5, 5)) == 32
    with pytest.raises(ValueError):
        enumerate_obs_sets(2, 3)


def test_bitmask_round_trip():
    assert to_bitmask((0, 2)) == 5
    assert from_bitmask(5) == (0, 2)
    assert from_bitmask(0) == ()


def test_state_space_tables():
    space = StateSpace([(0, 1, 2), (0, 1), (0, 1)], 2)
    assert space.psi_tot == 1 + (3 + 2 + 2) + (6 + 6 + 4)
    assert space.psi_max == 3
    assert [len(layer) for layer in space.layers] == [1, 7, 16]
    assert space.children[(space.empty, 0)] == ((0, None, None), (1, None, None), (2, None, None))
    # no extensions out of the last layer
    assert not any(len(domain(psi)) == 2 for psi, _ in space.children)
    reveal = space.reveal_table((1,))
    assert [reveal[space.state_index[phi]] for phi in [(2, 1, 0), (0, 0, 1)]] == [(None, 1, None), (None, 0, None)]


# --- properties -----------------------------------------------------------

alphabets_st = st.lists(st.integers(1, 3), min_size=1, max_size=4).map(lambda s: [tuple(range(k)) for k in s])


@st.composite
def partial_with_alphabets(draw):
    ab = draw(alphabets_st)
    psi = tuple(draw(st.one_of(st.none(), st.sampled_from(a))) for a in ab)
    return ab, psi


@given(partial_with_alphabets())
def test_substate_reflexive_and_bottom(case):
    _, psi = case
    assert is_substate(psi, psi)
    assert is_substate(psi, empty_partial(len(psi)))


@given(partial_with_alphabets())
def test_substates_are_distinct_restrictions(case):
    _, psi = case
    subs = substates(psi)
    assert len(subs) == 2 ** len(domain(psi)) == len(set(subs))
    assert all(is_substate(psi, s) for s in subs)


@given(partial_with_alphabets(), st.data())
def test_consistency_matches_substate(case, data):
    ab, psi = case
    phi = tuple(data.draw(st.sampled_from(a)) for a in ab)
    assert is_consistent(phi, psi) == is_substate(phi, psi)


@given(alphabets_st, st.data())
def test_partials_partition_states(ab, data):
    D = len(ab)
    obs_set = tuple(sorted(data.draw(st.sets(st.integers(0, D - 1)))))
    states = StateSpace(ab, 0).states
    counts = [sum(is_consistent(phi, psi) for phi in states) for psi in enumerate_partials(obs_set, ab)]
    assert sum(counts) == math.prod(len(a) for a in ab)
    assert all(restrict(phi, obs_set) in enumerate_partials(obs_set, ab) for phi in states)


@given(st.integers(0, 7), st.data())
def test_obs_set_count(D, data):
    m = data.draw(st.integers(0, D))
    assert len(enumerate_obs_sets(D, m)) == sum(math.comb(D, j) for j in range(m + 1))
