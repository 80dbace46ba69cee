import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from costly_obs import ContextualUCB, MetaUCB, SeqOOS, SimOOS
from costly_obs.environment import GenerativeModel, make_parity_model, make_switch_model, oracle_seq, oracle_sim
from costly_obs.validation import check_budget, check_generator, check_horizon, check_partial_states

nan = np.nan


@pytest.mark.parametrize("est", [SimOOS(m=2, horizon=50), SeqOOS(m=1, beta=2.0), ContextualUCB(beta=3.0),
                                 MetaUCB(m=1, max_arms=20)])
def test_params_and_clone(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    twin.set_params(horizon=7)
    assert twin.horizon == 7 and est.get_params()["horizon"] == params["horizon"]


def test_sim_oos_learns_parity():
    model = make_parity_model(cost=0.05)
    est = SimOOS(m=2, horizon=30_000, random_state=0).fit(model)
    assert est.policy_.obs_set == (0, 1)
    X = np.array([[0, 0, nan], [0, 1, 1], [1, 0, 0], [1, 1, nan]])
    np.testing.assert_array_equal(est.predict(X), [0, 1, 1, 0])
    assert est.score(model) == pytest.approx(oracle_sim(model, 2, 1.0).value)
    assert est.n_rounds_ == est.trace_.rounds
    with pytest.raises(ValueError):
        est.predict([[0, nan, nan]])


def test_seq_oos_learns_switch():
    model = make_switch_model(cost=0.02)
    est = SeqOOS(m=2, horizon=60_000, random_state=1).fit(model)
    assert est.score(model) == pytest.approx(oracle_seq(model, 2, 1.0).value)
    X = [[0, 1, nan], [1, nan, 0], [0, 0, 1]]
    np.testing.assert_array_equal(est.predict(X), [1, 0, 0])


def test_contextual_ucb_estimator():
    model = make_parity_model(cost=0.05)
    est = ContextualUCB(horizon=5000, random_state=2).fit(model)
    np.testing.assert_array_equal(est.predict([[0, 1, 0], [1, 1, 1]]), [1, 0])
    with pytest.raises(ValueError):
        est.predict([[0, nan, 0]])


def test_meta_ucb_estimator():
    model = GenerativeModel([(0, 1)], [0.5, 0.5], [[0.9, 0.1], [0.1, 0.9]], [0.05])
    est = MetaUCB(m=1, horizon=20_000, random_state=3).fit(model)
    assert est.policy_.obs_set == (0,)
    np.testing.assert_array_equal(est.predict([[0], [1]]), [0, 1])
    assert len(est.policies_) == 6


def test_not_fitted_and_bad_inputs():
    with pytest.raises(NotFittedError):
        SimOOS().predict([[0, 0, 0]])
    with pytest.raises(TypeError):
        SimOOS().fit("model")
    with pytest.raises(ValueError):
        SimOOS(m=5).fit(make_parity_model())
    with pytest.raises(ValueError):
        SeqOOS(horizon=0).fit(make_parity_model())
    with pytest.raises(ValueError):
        ContextualUCB(random_state="seed").fit(make_parity_model())


def test_seeded_fits_are_reproducible():
    model = make_parity_model()
    a = SimOOS(m=2, horizon=3000, random_state=4).fit(model)
    b = SimOOS(m=2, horizon=3000, random_state=4).fit(model)
    np.testing.assert_array_equal(a.trace_.reward, b.trace_.reward)
    assert a.gain_ == b.gain_


def test_validation_helpers():
    g = np.random.default_rng(0)
    assert check_generator(g) is g
    assert isinstance(check_generator(3), np.random.Generator)
    assert check_budget(np.int64(2), 3) == 2
    with pytest.raises(ValueError):
        check_budget(1.5, 3)
    assert check_horizon(10) == 10
    rows = check_partial_states(np.array([[0, nan], [1, 2]]), [(0, 1), (0, 1, 2)])
    assert rows == [(0, None), (1, 2)]
    assert check_partial_states([[None, 1]], [(0, 1), (0, 1)]) == [(None, 1)]
    with pytest.raises(ValueError):
        check_partial_states([[0, 3]], [(0, 1), (0, 1, 2)])
    with pytest.raises(ValueError):
        check_partial_states([[0.5, 1]], [(0, 1), (0, 1, 2)])
    with pytest.raises(ValueError):
        check_partial_states([[0]], [(0, 1), (0, 1, 2)])
