import numpy as np
import pytest
from conftest import random_mixture
from scipy.stats import multivariate_normal

from utphd.core import MixtureState
from utphd.filter_tphd import (gm_tphd_predict, gm_tphd_update, measurement_terms, tphd_predict,
                               tphd_update)
from utphd.models import BetaTransition, BirthModel, LinearGaussianModel
from utphd.reduction import reduce_mixture
from utphd.sim import generate_measurements, generate_truth, make_scenario

M = LinearGaussianModel.constant_velocity()


def test_single_component_hand_computation(small_clutter):
    rng = np.random.default_rng(0)
    mix = random_mixture(rng, 1)
    z = np.array([[5.0, 6.0]])
    out = tphd_update(mix, z, M, small_clutter, gate=None)
    w, u, v = mix.weights[0], mix.beta_u[0], mix.beta_v[0]
    a = u / (u + v)
    P = mix.gathered_covs()[0]
    q = multivariate_normal(M.H @ mix.means[0, -1], M.H @ P @ M.H.T + M.R).pdf(z[0])
    kappa = 2.0 / 1600.0
    np.testing.assert_allclose(out.weights, [w * (1 - a), a * w * q / (kappa + a * w * q)],
                               rtol=1e-12)
    np.testing.assert_allclose(out.beta_u, [u, u + 1])
    np.testing.assert_allclose(out.beta_v, [v + 1, v])


def test_branch_layout_and_normalization(small_clutter):
    rng = np.random.default_rng(1)
    mix = random_mixture(rng, 4)
    Z = rng.uniform(0, 20, (3, 2))
    out = tphd_update(mix, Z, M, small_clutter, gate=None)
    assert len(out) == 4 * 4
    det = out.weights[4:].reshape(3, 4)
    assert np.all(det.sum(axis=1) <= 1.0)
    assert np.all(out.weights >= 0)
    np.testing.assert_array_equal(out.birth_times, np.tile(mix.birth_times, 4))


def test_no_measurements_keeps_misdetection_only(small_clutter):
    mix = random_mixture(np.random.default_rng(2), 3)
    out = tphd_update(mix, np.zeros((0, 2)), M, small_clutter)
    a = mix.detection_means()
    np.testing.assert_allclose(out.weights, mix.weights * (1 - a))
    np.testing.assert_array_equal(out.means, mix.means)


def test_gate_zeroes_distant_detections(small_clutter):
    mix = random_mixture(np.random.default_rng(3), 2)
    far = np.array([[29.0, -9.0]])
    t = measurement_terms(mix, far, M, small_clutter, 40.0)
    out = tphd_update(mix, far, M, small_clutter, gate=40.0)
    gated = ~np.isfinite(t["logq"][:, 0])
    assert gated.any()
    assert np.all(out.weights[2:][gated] == 0.0)


def test_measurement_outside_region_rejected(small_clutter):
    mix = random_mixture(np.random.default_rng(4), 1)
    with pytest.raises(ValueError):
        tphd_update(mix, np.array([[100.0, 0.0]]), M, small_clutter)


def test_predict_prepends_births_and_scales_survivors(bt):
    mix = random_mixture(np.random.default_rng(5), 2, window=1)
    mix.window = 3
    b = BirthModel.uniform([[0, 0, 0, 0]], np.eye(4), 0.01, 8, 2)
    pred = tphd_predict(mix, M, b, bt)
    assert len(pred) == 3
    assert pred.time == mix.time + 1
    assert pred.weights[0] == 0.01 and pred.lengths[0] == 1 and pred.birth_times[0] == pred.time
    np.testing.assert_allclose(pred.weights[1:], 0.99 * mix.weights)
    np.testing.assert_array_equal(pred.lengths[1:], mix.lengths + 1)


def test_filter_type_checks(bt):
    gm = MixtureState.empty(4, beta=False)
    bg = MixtureState.empty(4, beta=True)
    b = BirthModel.uniform([[0, 0, 0, 0]], np.eye(4), 0.01, 8, 2)
    with pytest.raises(ValueError):
        tphd_predict(gm, M, b, bt)
    with pytest.raises(ValueError):
        gm_tphd_predict(bg, M, b)


def test_gm_baseline_hand_computation(small_clutter):
    mix = random_mixture(np.random.default_rng(6), 1, beta=False)
    z = np.array([[5.0, 6.0]])
    out = gm_tphd_update(mix, z, M, small_clutter, 0.9, gate=None)
    P = mix.gathered_covs()[0]
    q = multivariate_normal(M.H @ mix.means[0, -1], M.H @ P @ M.H.T + M.R).pdf(z[0])
    w = mix.weights[0]
    np.testing.assert_allclose(out.weights, [0.1 * w, 0.9 * w * q / (2 / 1600 + 0.9 * w * q)])
    assert not out.has_beta


def concentrated_gap(concentration, scans=30):
    """Worst per-scan relative weight gap between BG and GM filters on one seed."""
    sc = make_scenario("scenario1")
    truth = generate_truth(sc)
    rng = np.random.default_rng(7)
    b_bg = BirthModel.uniform([x.tolist() for x in sc.birth.means], sc.birth.covs[0], 0.01,
                              0.98 * concentration, 0.02 * concentration)
    bt = BetaTransition(1.0)
    bg = MixtureState.empty(4, beta=True, window=5)
    gm = MixtureState.empty(4, beta=False, window=5)
    worst = 0.0
    for k in range(1, scans + 1):
        Z = generate_measurements(sc, truth, k, rng)
        bg = reduce_mixture(tphd_update(tphd_predict(bg, sc.model, b_bg, bt), Z, sc.model, sc.clutter))
        gm = reduce_mixture(gm_tphd_update(gm_tphd_predict(gm, sc.model, sc.birth), Z, sc.model,
                                           sc.clutter, 0.98))
        assert len(bg) == len(gm)
        a, b = np.sort(bg.weights), np.sort(gm.weights)
        worst = max(worst, float(np.max(np.abs(a - b) / b)))
    return worst


def test_concentrated_beta_converges_to_known_detection():
    # each missed detection still moves the Beta mean by about 1/(u+v)
    gaps = [concentrated_gap(s) for s in (1e6, 1e7, 1e8)]
    assert gaps[2] < 1e-4
    np.testing.assert_allclose(gaps[0] / gaps[1], 10, rtol=0.05)
    np.testing.assert_allclose(gaps[1] / gaps[2], 10, rtol=0.05)


def test_posterior_covariances_symmetric_psd(scenario, bt):
    truth = generate_truth(scenario)
    rng = np.random.default_rng(8)
    mix = MixtureState.empty(4, beta=True, window=5)
    for k in range(1, 25):
        Z = generate_measurements(scenario, truth, k, rng)
        mix = reduce_mixture(tphd_update(tphd_predict(mix, scenario.model, scenario.birth, bt), Z,
                                         scenario.model, scenario.clutter))
        P = mix.covs
        np.testing.assert_allclose(P, np.swapaxes(P, 1, 2), atol=1e-9)
        assert np.linalg.eigvalsh(P).min() > -1e-8 * np.abs(P).max()
