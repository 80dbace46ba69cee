"""Scikit-learn style front end for the online learners.

Hyperparameters go in the constructor, ``fit(model)`` runs the learner
online against a :class:`GenerativeModel` for ``horizon`` steps, fitted
state lands in trailing-underscore attributes, and ``predict`` maps rows of
partial states (``NaN`` for unobserved) to actions.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import baselines, seq_oos, sim_oos
from .environment import STOP, policy_gain_seq, policy_gain_sim
from .estimation import LearnerConfig
from .partial_state import MISSING, restrict
from .trace import compute_gain
from .validation import check_budget, check_generator, check_horizon, check_model, check_partial_states


class _OnlineLearner(BaseEstimator):

    def _setup(self, model):
        model = check_model(model)
        self.horizon_ = check_horizon(self.horizon)
        return model, check_generator(self.random_state)

    def _finish(self, model, trace):
        self.trace_ = trace
        self.n_rounds_ = trace.rounds
        self.gain_ = compute_gain(trace)
        self.alphabets_ = model.alphabets
        return self

    def _rows(self, X):
        check_is_fitted(self, "trace_")
        return check_partial_states(X, self.alphabets_)


class SimOOS(_OnlineLearner):
    """Optimistic simultaneous observation selection.

    Parameters
    ----------
    m : int
        Maximum number of observations bought per step.
    beta : float
        Weight of the reward relative to observation costs.
    delta : float
        Confidence level of the radii.
    horizon : int
        Number of online steps run by ``fit``.
    radius_scale : float
        Multiplier on every confidence radius (0 gives a plug-in learner).
    random_state : int, Generator or None

    Attributes
    ----------
    policy_ : SimPolicy
        Plug-in policy (all radii 0) built from the final counters.
    plan_ : SimPolicy
        Optimistic policy the learner would run next.
    trace_ : RunTrace
        Log of the online run.
    """

    def __init__(self, m=1, beta=1.0, delta=0.1, horizon=1000, radius_scale=1.0, random_state=None):
        self.m = m
        self.beta = beta
        self.delta = delta
        self.horizon = horizon
        self.radius_scale = radius_scale
        self.random_state = random_state

    def fit(self, model, y=None):
        model, rng = self._setup(model)
        config = LearnerConfig(check_budget(self.m, model.D), self.beta, self.delta, self.radius_scale)
        self.state_ = sim_oos.SimOosState.for_model(model, config)
        trace = sim_oos.run(self.horizon_, model, config, rng, state=self.state_)
        # optimistic plan for the next step, and the plug-in policy read off the counters
        self.plan_, self.vhat_ = sim_oos.plan_round(self.state_)
        self.policy_, _ = sim_oos.plan_round(self.state_, replace(self.state_.params, scale=0.0))
        self.counters_ = self.state_.counters
        return self._finish(model, trace)

    def predict(self, X):
        out = []
        for psi in self._rows(X):
            if any(psi[i] is MISSING for i in self.policy_.obs_set):
                raise ValueError(f"partial state {psi} lacks observations {self.policy_.obs_set}")
            out.append(self.policy_.action_map[restrict(psi, self.policy_.obs_set)])
        return np.asarray(out, dtype=np.int64)

    def score(self, model, y=None):
        """Exact expected gain of the learned policy under ``model``."""
        check_is_fitted(self, "policy_")
        return policy_gain_sim(check_model(model), self.policy_, self.beta)


class SeqOOS(_OnlineLearner):
    """Optimistic sequential observation selection. Parameters as :class:`SimOOS`."""

    def __init__(self, m=1, beta=1.0, delta=0.1, horizon=1000, radius_scale=1.0, random_state=None):
        self.m = m
        self.beta = beta
        self.delta = delta
        self.horizon = horizon
        self.radius_scale = radius_scale
        self.random_state = random_state

    def fit(self, model, y=None):
        model, rng = self._setup(model)
        config = LearnerConfig(check_budget(self.m, model.D), self.beta, self.delta, self.radius_scale)
        self.state_ = seq_oos.SeqOosState.for_model(model, config)
        trace = seq_oos.run_seq(self.horizon_, model, config, rng, state=self.state_)
        st = self.state_
        self.plan_ = seq_oos.odp_plan(st.counters, st.params, st.beta, st.m, st.space, st.costs, st.A)
        self.policy_ = seq_oos.odp_plan(st.counters, replace(st.params, scale=0.0), st.beta, st.m, st.space,
                                        st.costs, st.A).policy
        self.counters_ = st.counters
        return self._finish(model, trace)

    def predict(self, X):
        out = []
        for row in self._rows(X):
            psi = (MISSING,) * len(row)
            for _ in range(self.m):
                i = self.policy_.obs_fn[psi]
                if i is STOP:
                    break
                if row[i] is MISSING:
                    raise ValueError(f"policy needs observation {i} which is missing in {row}")
                psi = psi[:i] + (row[i],) + psi[i + 1:]
            out.append(self.policy_.action_fn[psi])
        return np.asarray(out, dtype=np.int64)

    def score(self, model, y=None):
        check_is_fitted(self, "policy_")
        return policy_gain_seq(check_model(model), self.policy_, self.beta, self.m)


class ContextualUCB(_OnlineLearner):
    """Buys every observation each step and runs UCB1 per full state."""

    def __init__(self, beta=1.0, horizon=1000, random_state=None):
        self.beta = beta
        self.horizon = horizon
        self.random_state = random_state

    def fit(self, model, y=None):
        model, rng = self._setup(model)
        trace = baselines.contextual_ucb_run(self.horizon_, model, self.beta, rng)
        self.n_states_ = len(model.states)
        means = np.zeros((len(model.states), model.A))
        counts = np.zeros_like(means)
        idx = [model.state_index[phi] for phi in trace.psi]
        np.add.at(means, (idx, trace.action), trace.reward)
        np.add.at(counts, (idx, trace.action), 1)
        self.mean_reward_ = np.divide(means, counts, out=np.zeros_like(means), where=counts > 0)
        self.state_index_ = model.state_index
        return self._finish(model, trace)

    def predict(self, X):
        out = []
        for psi in self._rows(X):
            if any(x is MISSING for x in psi):
                raise ValueError("contextual UCB acts on full states only")
            out.append(int(np.argmax(self.mean_reward_[self.state_index_[psi]])))
        return np.asarray(out, dtype=np.int64)


class MetaUCB(_OnlineLearner):
    """UCB1 over every (observation set, action map) pair; tiny instances only."""

    def __init__(self, m=1, beta=1.0, horizon=1000, max_arms=baselines.MAX_META_ARMS, random_state=None):
        self.m = m
        self.beta = beta
        self.horizon = horizon
        self.max_arms = max_arms
        self.random_state = random_state

    def fit(self, model, y=None):
        model, rng = self._setup(model)
        m = check_budget(self.m, model.D)
        trace, policies, stats = baselines._meta_ucb(self.horizon_, model, self.beta, m, rng,
                                                     limit=self.max_arms)
        self.policies_ = policies
        self.pulls_ = np.array([s.pulls for s in stats])
        self.policy_ = policies[int(np.argmax(self.pulls_))]
        return self._finish(model, trace)

    def predict(self, X):
        out = []
        for psi in self._rows(X):
            out.append(self.policy_.action_map[restrict(psi, self.policy_.obs_set)])
        return np.asarray(out, dtype=np.int64)
