"""Trajectory PHD recursion with Beta-Gaussian components, and the known-p_D baseline."""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .core import MixtureState
from .lscan import kalman_terms, predict_mixture_windows
from .models import (BetaTransition, BirthModel, ClutterModel, LinearGaussianModel,
                     beta_predict, birth_mixture)

DEFAULT_GATE = 40.0
LOG_2PI = np.log(2.0 * np.pi)


def concat_mixtures(a: MixtureState, b: MixtureState) -> MixtureState:
    """Components of ``a`` followed by those of ``b`` (same window layout)."""
    if a.means.shape[1:] != b.means.shape[1:]:
        raise ValueError("mixtures have different window layouts")
    cat = np.concatenate
    return MixtureState(
        time=b.time,
        weights=cat([a.weights, b.weights]),
        birth_times=cat([a.birth_times, b.birth_times]),
        lengths=cat([a.lengths, b.lengths]),
        means=cat([a.means, b.means]),
        covs=cat([a.covs, b.covs]),
        cov_index=cat([a.cov_index, b.cov_index + len(a.covs)]),
        heads=cat([a.heads, b.heads]),
        beta_u=None if a.beta_u is None else cat([a.beta_u, b.beta_u]),
        beta_v=None if a.beta_v is None else cat([a.beta_v, b.beta_v]),
        cardinality=b.cardinality,
        window=b.window,
    )


def predict_phd(prior: MixtureState, m: LinearGaussianModel, b: BirthModel,
                bt: BetaTransition | None) -> MixtureState:
    """Births at ``prior.time + 1`` followed by the predicted survivors."""
    k = prior.time + 1
    beta = prior.has_beta
    W = prior.means.shape[1]
    survivors = None
    if len(prior):
        means, covs, heads = predict_mixture_windows(prior, m.F, m.Q)
        W = means.shape[1]
        u = v = None
        if beta:
            u, v = beta_predict(prior.beta_u, prior.beta_v, bt)
        survivors = MixtureState(
            time=k, weights=m.p_S * prior.weights, birth_times=prior.birth_times.copy(),
            lengths=prior.lengths + 1, means=means, covs=covs, cov_index=np.arange(len(prior)),
            heads=heads, beta_u=u, beta_v=v, window=prior.window)
    births = birth_mixture(b, k, W, beta=beta, window=prior.window)
    if survivors is None:
        return births
    return concat_mixtures(births, survivors)


def tphd_predict(prior: MixtureState, m: LinearGaussianModel, b: BirthModel,
                 bt: BetaTransition) -> MixtureState:
    """Prediction step of the Beta-Gaussian trajectory PHD filter."""
    if not prior.has_beta:
        raise ValueError("tphd_predict needs a Beta-Gaussian mixture")
    return predict_phd(prior, m, b, bt)


def gm_tphd_predict(prior: MixtureState, m: LinearGaussianModel, b: BirthModel) -> MixtureState:
    """Prediction step of the Gaussian-mixture trajectory PHD filter (known p_D)."""
    if prior.has_beta:
        raise ValueError("gm_tphd_predict needs a Gaussian mixture without Beta factors")
    return predict_phd(prior, m, b, None)


def measurement_terms(pred: MixtureState, Z, m: LinearGaussianModel, cl: ClutterModel, gate):
    """Kalman terms and gated log-likelihoods ``log q_j(z)`` of shape (J, M)."""
    Z = np.asarray(Z, dtype=float).reshape(-1, m.n_z)
    if len(Z) and not cl.inside(Z).all():
        raise ValueError("measurement outside the clutter region")
    t = kalman_terms(pred.means, pred.gathered_covs(), m.H, m.R)
    nu = Z[None, :, :] - t["zbar"][:, None, :]
    maha = np.einsum("jmi,jik,jmk->jm", nu, t["S_inv"], nu)
    logq = -0.5 * (maha + t["logdet"][:, None] + m.n_z * LOG_2PI)
    if gate is not None:
        logq[maha > gate] = -np.inf
    t.update(Z=Z, nu=nu, logq=logq)
    return t


def detection_probs(pred: MixtureState, p_D) -> np.ndarray:
    if pred.has_beta:
        return pred.detection_means()
    if p_D is None:
        raise ValueError("known detection probability required for a Gaussian mixture")
    return np.full(len(pred), float(p_D))


def assemble_update(pred: MixtureState, t: dict, w_miss, w_det, cardinality=None) -> MixtureState:
    """Lay out misdetection branches (J) followed by detection branches (z-major, J per z)."""
    J, W, n = pred.means.shape
    M = t["Z"].shape[0]
    shift = np.einsum("jdz,jmz->mjd", t["K"], t["nu"]).reshape(M * J, W, n)
    det_means = np.tile(pred.means, (M, 1, 1)) + shift
    tile = lambda x: np.tile(x, M + 1)  # noqa: E731
    beta_u = beta_v = None
    if pred.has_beta:
        beta_u = np.concatenate([pred.beta_u, np.tile(pred.beta_u + 1.0, M)])
        beta_v = np.concatenate([pred.beta_v + 1.0, np.tile(pred.beta_v, M)])
    return MixtureState(
        time=pred.time,
        weights=np.concatenate([w_miss, w_det.T.reshape(-1)]),
        birth_times=tile(pred.birth_times),
        lengths=tile(pred.lengths),
        means=np.concatenate([pred.means, det_means]),
        covs=np.concatenate([pred.gathered_covs(), t["post_covs"]]),
        cov_index=np.concatenate([np.arange(J), J + np.tile(np.arange(J), M)]),
        heads=np.tile(pred.heads, M + 1),
        beta_u=beta_u,
        beta_v=beta_v,
        cardinality=cardinality,
        window=pred.window,
    )


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _phd_update(pred, Z, m, cl, p_D, gate):
    t = measurement_terms(pred, Z, m, cl, gate)
    a = detection_probs(pred, p_D)
    w = pred.weights
    log_num = _log(a * w)[:, None] + t["logq"]
    log_kappa = _log(cl.rate * cl.density(t["Z"])) if len(t["Z"]) else np.zeros(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_den = np.logaddexp(log_kappa, logsumexp(log_num, axis=0))
        w_det = np.exp(log_num - log_den)
    w_det = np.nan_to_num(w_det, nan=0.0)
    return assemble_update(pred, t, w * (1.0 - a), w_det)


def tphd_update(pred: MixtureState, Z, m: LinearGaussianModel, cl: ClutterModel,
                gate: float | None = DEFAULT_GATE) -> MixtureState:
    """Update step of the Beta-Gaussian trajectory PHD filter.

    The output holds ``len(pred) * (1 + len(Z))`` components: a misdetection
    branch per component (Beta ``(u, v+1)``, weight ``w v/(u+v)``) followed by a
    detection branch per (measurement, component) pair (Beta ``(u+1, v)``,
    Kalman-updated window). Detection branches whose squared Mahalanobis
    distance exceeds ``gate`` get zero weight.
    """
    if not pred.has_beta:
        raise ValueError("tphd_update needs a Beta-Gaussian mixture")
    if not len(pred):
        return pred
    return _phd_update(pred, Z, m, cl, None, gate)


def gm_tphd_update(pred: MixtureState, Z, m: LinearGaussianModel, cl: ClutterModel, p_D: float,
                   gate: float | None = DEFAULT_GATE) -> MixtureState:
    """Update step of the Gaussian-mixture trajectory PHD filter with known ``p_D``."""
    if pred.has_beta:
        raise ValueError("gm_tphd_update needs a Gaussian mixture without Beta factors")
    if not len(pred):
        return pred
    return _phd_update(pred, Z, m, cl, p_D, gate)
