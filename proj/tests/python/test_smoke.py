import math

import numpy as np
import pytest

import gmchoice as gm


def homogeneous(n, alpha):
    return gm.GmnlModel(np.full(n + 1, 1.0 / (n + 1)), alpha)


def test_alpha_zero_is_mnl():
    v = np.array([0.4, 0.3, 0.2, 0.1])
    model = gm.GmnlModel(v, 0.0)
    pi = gm.gmnl_choice_probabilities(model, [1, 3])
    expected = np.array([0.4, 0.3, 0.0, 0.1]) / 0.8
    assert np.allclose(pi, expected, atol=1e-14)


def test_closed_form_matches_chain():
    model = gm.GmnlModel(np.array([0.25, 0.3, 0.25, 0.2]), 2.5)
    chain = model.to_chain()
    for s in ([1], [2, 3], [1, 2, 3]):
        assert np.allclose(gm.gmnl_choice_probabilities(model, s),
                           gm.choice_probabilities(chain, s), atol=1e-12)


def test_homogeneous_optimum_size():
    result = gm.brute_force_gmnl(homogeneous(15, 2.0), [1.0] * 15)
    assert len(result["assortment"]) == 8
    assert result["method"] == "brute"


def test_fptas_close_to_brute_force():
    rng = np.random.default_rng(3)
    v = rng.uniform(0.2, 1.0, 9)
    model = gm.GmnlModel(v / v.sum(), 3.0)
    prices = list(rng.uniform(1.0, 10.0, 8))
    exact = gm.brute_force_gmnl(model, prices)["revenue"]
    approx = gm.fptas_gmnl(model, prices, epsilon=0.1)["revenue"]
    assert approx <= exact + 1e-12
    assert approx >= 0.5 * exact


def test_no_purchase_curve_mnl_column():
    curve = gm.no_purchase_curve(15, [0.0, 10.0], 15)
    assert len(curve) == 2 and len(curve[0]) == 15
    assert all(math.isclose(curve[0][k - 1], 1.0 / (k + 1), rel_tol=1e-12) for k in range(1, 16))


def test_simulation_is_seeded():
    chain = homogeneous(4, 1.0).to_chain()
    a = gm.simulate_frequencies(chain, [1, 2], 5000, 7)
    b = gm.simulate_frequencies(chain, [1, 2], 5000, 7, threads=2)
    assert np.array_equal(a, b)
    assert a.sum() == pytest.approx(1.0)


def test_estimation_round_trip():
    x = gm.synthetic_features(6, 3, 5)
    beta = gm.synthetic_beta(x, 1.5)
    offered, choices = gm.generate_dataset(beta, 1.5, x, 3000, 5)
    fit = gm.estimate_gmnl(x, offered, choices)
    assert fit["log_likelihood"] >= gm.log_likelihood(x, offered, choices, beta, 1.5) - 1e-6
    mnl = gm.estimate_mnl(x, offered, choices)
    assert gm.log_likelihood(x, offered, choices, mnl, 0.0) <= fit["log_likelihood"] + 1e-9


def test_errors_map_to_python_exceptions():
    with pytest.raises(gm.InvalidInput):
        gm.GmnlModel(np.array([0.5, 0.6]), 1.0)
    assert issubclass(gm.InvalidInput, gm.GmchoiceError)


def test_roc_auc():
    assert gm.roc_auc([0.1, 0.9, 0.4], [0, 1, 0]) == 1.0
