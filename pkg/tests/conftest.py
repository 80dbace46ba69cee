import itertools

import numpy as np
import pytest

from costly_obs.environment import GenerativeModel

# Lines collected by the acceptance suite and echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def two_bit_model():
    """Two binary observations with the hand-checkable joint 0.4 / 0.1 / 0.25 / 0.25.

    Action 0 earns 1 in (0, 0) and 0 elsewhere; action 1 earns 0.5 everywhere.
    """
    joint = [0.4, 0.1, 0.25, 0.25]
    rewards = [[1.0, 0.0, 0.0, 0.0], [0.5, 0.5, 0.5, 0.5]]
    return GenerativeModel([(0, 1), (0, 1)], joint, rewards, [0.1, 0.2])


@pytest.fixture
def one_bit_model():
    """D=1 binary uniform; each action is right in exactly one state; c = 0.1."""
    return GenerativeModel([(0, 1)], [0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]], [0.1])


def brute_force_l1(p_hat, values, radius, step=1e-3):
    """Grid search over the simplex (step ``step``) for ``max q @ values`` in the L1 ball."""
    k = len(values)
    n = int(round(1 / step))
    p_hat = np.asarray(p_hat)
    values = np.asarray(values)
    best = -np.inf
    for head in itertools.product(range(n + 1), repeat=k - 1):
        s = sum(head)
        if s > n:
            continue
        q = np.array(head + (n - s,)) / n
        if np.abs(q - p_hat).sum() <= radius + 1e-12:
            best = max(best, float(q @ values))
    return best


def grid_points(k, n):
    """All compositions of ``n`` into ``k`` parts, as rows of an int array."""
    if k == 1:
        return np.array([[n]])
    rows = []
    for first in range(n + 1):
        rest = grid_points(k - 1, n - first)
        rows.append(np.column_stack([np.full(len(rest), first), rest]))
    return np.vstack(rows)


def brute_force_l1_fast(p_hat, values, radius, step=1e-3, cache={}):
    """Vectorized :func:`brute_force_l1` over the same grid."""
    k = len(values)
    n = int(round(1 / step))
    if (k, n) not in cache:
        cache[(k, n)] = [np.ascontiguousarray(col) for col in (grid_points(k, n) / n).T]
    cols = cache[(k, n)]
    dist = np.abs(cols[0] - p_hat[0])
    score = cols[0] * values[0]
    for j in range(1, k):
        dist += np.abs(cols[j] - p_hat[j])
        score += cols[j] * values[j]
    return float(score[dist <= radius + 1e-12].max())


def lp_l1(p_hat, values, radius):
    """Exact LP value via scipy (variables q and slack d with |q - p_hat| <= d)."""
    from scipy.optimize import linprog

    k = len(values)
    c = np.concatenate([-np.asarray(values, dtype=float), np.zeros(k)])
    eye = np.eye(k)
    A_ub = np.block([[eye, -eye], [-eye, -eye], [np.zeros((1, k)), np.ones((1, k))]])
    b_ub = np.concatenate([p_hat, -np.asarray(p_hat), [radius]])
    A_eq = np.concatenate([np.ones(k), np.zeros(k)])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=[(0, 1)] * k + [(0, None)] * k,
                  method="highs", options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    assert res.success
    return -res.fun


def enumerate_policy_values(model, m, beta):
    """Gain of every simultaneous policy, computed straight from the full-state table."""
    from costly_obs.partial_state import enumerate_obs_sets, enumerate_partials, restrict

    S = model.states
    out = []
    for obs_set in enumerate_obs_sets(model.D, m):
        psis = enumerate_partials(obs_set, model.alphabets)
        cost = sum(model.costs[i] for i in obs_set)
        # expected reward of action a restricted to each psi
        contrib = {psi: np.zeros(model.A) for psi in psis}
        for k, phi in enumerate(S):
            contrib[restrict(phi, obs_set)] += model.joint[k] * model.mean_reward[:, k]
        for acts in itertools.product(range(model.A), repeat=len(psis)):
            total = sum(contrib[psi][a] for psi, a in zip(psis, acts))
            out.append((beta * total - cost, obs_set, acts))
    return out


def seq_value_by_recursion(model, m, beta):
    """Optimal sequential value by recursion over sets of consistent full states."""
    S = model.states
    P = model.joint
    R = model.mean_reward

    def value(idx, observed, depth):
        mass = P[idx].sum()
        if mass <= 0:
            return 0.0
        best = beta * max(float(R[a, idx] @ P[idx]) for a in range(model.A))
        if depth == m:
            return best
        for i in range(model.D):
            if i in observed:
                continue
            total = -model.costs[i] * mass
            for x in model.alphabets[i]:
                sub = [k for k in idx if S[k][i] == x]
                total += value(np.array(sub, dtype=int), observed | {i}, depth + 1) if sub else 0.0
            best = max(best, total)
        return best

    return value(np.arange(len(S)), frozenset(), 0)


def rational_model(rng, sizes, A, W=9, R=8, zero_costs=False):
    """Model whose probabilities are integer weights / total and rewards integers / ``R``.

    Returns the model with its integer weight vector and integer reward
    table so counters can be loaded with exact counts.
    """
    weights = rng.integers(1, W + 1, size=int(np.prod(sizes)))
    ticks = rng.integers(0, R + 1, size=(A, len(weights)))
    costs = np.zeros(len(sizes)) if zero_costs else rng.integers(0, 7, size=len(sizes)) / 20.0
    alphabets = [tuple(range(s)) for s in sizes]
    model = GenerativeModel(alphabets, weights / weights.sum(), ticks / R, costs)
    return model, weights, ticks, R


def _consistent(model, psi):
    return [k for k, phi in enumerate(model.states) if all(x is None or x == y for x, y in zip(psi, phi))]


def preload_counters(counters, space, model, weights, ticks, R):
    """Fill ``counters`` so every empirical estimate equals the model quantity exactly."""
    total = int(weights.sum())
    for obs_set in space.obs_sets:
        counters.n_obs_set[obs_set] = total
        for psi in space.partials[obs_set]:
            idx = _consistent(model, psi)
            n = int(weights[idx].sum())
            counters.n_obs_partial[psi] = n
            for a in range(model.A):
                counters.n_act[(a, psi)] = n
                counters.sum_reward[(a, psi)] = float(weights[idx] @ ticks[a, idx]) / R
    for (psi, i), kids in space.children.items():
        counters.n_trans_pair[(psi, i)] = int(weights[_consistent(model, psi)].sum())
        for child in kids:
            counters.n_trans[(psi, i, child)] = int(weights[_consistent(model, child)].sum())
    counters.t = total
