"""Trajectory CPHD recursion with Beta-Gaussian components, and the known-p_D baseline.

The cardinality update needs elementary symmetric functions of the per-measurement
detection ratios ``Lambda(z) = sum_j a_j w_j q_j(z) / c(z)``, once for the full scan
and once for every leave-one-out subset. All of them are produced by a single
batched recurrence over rows of a masked ``(M+1, M)`` matrix, which costs
``O(M^3)`` flops and avoids the cancellation of ESF downdating.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from .core import DegenerateScanError, MixtureState
from .filter_tphd import (DEFAULT_GATE, _log, assemble_update, detection_probs,
                          measurement_terms, predict_phd)
from .models import BetaTransition, BirthModel, ClutterModel, LinearGaussianModel


def esf(vals) -> np.ndarray:
    """Elementary symmetric functions ``e_0 .. e_m`` of ``vals``.

    Uses the recurrence ``e_q <- e_q + x * e_{q-1}``, which is stable for
    nonnegative inputs.

    >>> esf([1.0, 2.0, 3.0])
    array([ 1.,  6., 11.,  6.])
    """
    x = np.asarray(vals, dtype=float).reshape(-1)
    return esf_rows(x[None, :])[0]


def esf_rows(X: np.ndarray) -> np.ndarray:
    """Row-wise elementary symmetric functions of ``X`` (R, m) -> (R, m+1)."""
    R, m = X.shape
    E = np.zeros((R, m + 1))
    E[:, 0] = 1.0
    for i in range(m):
        E[:, 1:i + 2] = E[:, 1:i + 2] + X[:, i:i + 1] * E[:, :i + 1]
    return E


def log_esf_with_exclusions(lam: np.ndarray) -> np.ndarray:
    """Log ESFs of ``lam`` (row 0) and of ``lam`` minus element ``i`` (row ``i+1``).

    Row ``i+1`` has a trailing ``-inf`` since the leave-one-out set is one shorter.
    """
    lam = np.asarray(lam, dtype=float)
    M = lam.size
    scale = lam.max() if M and lam.max() > 0 else 1.0
    x = lam / scale
    X = np.vstack([x[None, :], np.where(np.eye(M, dtype=bool), 0.0, x[None, :])])
    E = esf_rows(X)
    E[1:, -1] = 0.0
    with np.errstate(divide="ignore"):
        return np.log(E) + np.arange(M + 1) * np.log(scale)


@dataclass(frozen=True)
class UpsilonInputs:
    """Everything the cardinality terms depend on for one scan.

    ``lam`` holds the per-measurement ratios ``sum_j a_j w_j q_j(z) / c(z)``;
    ``rho_c`` is the clutter cardinality pmf, at least ``len(lam) + 1`` long.
    """

    a_vec: np.ndarray
    w_vec: np.ndarray
    lam: np.ndarray
    rho_c: np.ndarray
    n_max: int

    def __post_init__(self):
        if np.shape(self.a_vec) != np.shape(self.w_vec):
            raise ValueError("a_vec and w_vec must have equal length")
        if np.any(np.asarray(self.w_vec) < 0):
            raise ValueError("weights must be nonnegative")
        if np.any((np.asarray(self.a_vec) < 0) | (np.asarray(self.a_vec) > 1)):
            raise ValueError("detection probabilities must lie in [0, 1]")
        if len(self.rho_c) < len(self.lam) + 1:
            raise ValueError("clutter cardinality pmf shorter than the scan")


def log_upsilon_terms(u: int, log_e: np.ndarray, m: int, log_rho_c: np.ndarray,
                      log_miss: float, log_total: float, n_max: int) -> np.ndarray:
    """``log Upsilon^u(n)`` for each row of ``log_e`` (R, m+1) over n = 0..n_max.

    ``m`` is the size of the measurement set the ESFs were taken over.
    """
    n = np.arange(n_max + 1)[:, None]
    j = np.arange(m + 1)[None, :]
    k = n - j - u
    valid = k >= 0
    kk = np.where(valid, k, 0)
    with np.errstate(invalid="ignore"):
        power = np.where(kk > 0, kk * log_miss, 0.0)
    base = (gammaln(m - j + 1) + log_rho_c[m - j] + gammaln(n + 1) - gammaln(kk + 1)
            + power - n * log_total)
    base = np.where(valid, base, -np.inf)
    full = base[None, :, :] + log_e[:, None, :m + 1]
    return logsumexp(full, axis=2)


def log_upsilon(u: int, inp: UpsilonInputs, exclude: int | None = None) -> np.ndarray:
    """Log of :func:`upsilon`."""
    w = np.asarray(inp.w_vec, dtype=float)
    a = np.asarray(inp.a_vec, dtype=float)
    total = w.sum()
    if not total > 0:
        raise ValueError("upsilon needs a mixture with positive total weight")
    lam = np.asarray(inp.lam, dtype=float)
    if exclude is not None:
        lam = np.delete(lam, exclude)
    log_e = log_esf_with_exclusions(lam)[:1]
    return log_upsilon_terms(u, log_e, lam.size, _log(np.asarray(inp.rho_c, dtype=float)),
                             _log(np.dot(1.0 - a, w)), np.log(total), inp.n_max)[0]


def upsilon(u: int, inp: UpsilonInputs, exclude: int | None = None) -> np.ndarray:
    """Cardinality update term ``Upsilon^u(n)`` for n = 0..n_max.

    Parameters
    ----------
    u : 0 or 1
    inp : UpsilonInputs
    exclude : index into ``inp.lam`` of a measurement to leave out

    Returns
    -------
    (n_max+1,) array
    """
    if u not in (0, 1):
        raise ValueError("u must be 0 or 1")
    return np.exp(log_upsilon(u, inp, exclude))


@lru_cache(maxsize=16)
def _thinning(n_max: int, p_S: float) -> np.ndarray:
    n = np.arange(n_max + 1)
    return stats.binom.pmf(n[:, None], n[None, :], p_S)


def predict_cardinality(rho: np.ndarray, p_S: float, rho_birth: np.ndarray) -> np.ndarray:
    """Binomial thinning by ``p_S`` convolved with the birth pmf, truncated and renormalized."""
    n_max = rho.size - 1
    surv = _thinning(n_max, float(p_S)) @ rho
    out = np.convolve(surv, rho_birth[: n_max + 1])[: n_max + 1]
    return out / out.sum()


def _predict(prior, m, b, bt):
    if prior.cardinality is None:
        raise ValueError("CPHD prediction needs a cardinality distribution")
    pred = predict_phd(prior, m, b, bt)
    n_max = prior.cardinality.size - 1
    pred.cardinality = predict_cardinality(prior.cardinality, m.p_S, b.cardinality_pmf(n_max))
    return pred


def tcphd_predict(prior: MixtureState, m: LinearGaussianModel, b: BirthModel,
                  bt: BetaTransition) -> MixtureState:
    """Prediction step of the Beta-Gaussian trajectory CPHD filter."""
    if not prior.has_beta:
        raise ValueError("tcphd_predict needs a Beta-Gaussian mixture")
    return _predict(prior, m, b, bt)


def gm_tcphd_predict(prior: MixtureState, m: LinearGaussianModel, b: BirthModel) -> MixtureState:
    """Prediction step of the Gaussian-mixture trajectory CPHD filter (known p_D)."""
    if prior.has_beta:
        raise ValueError("gm_tcphd_predict needs a Gaussian mixture without Beta factors")
    return _predict(prior, m, b, None)


def _empty_update(pred: MixtureState) -> MixtureState:
    rho = pred.cardinality.copy()
    rho[1:] = 0.0
    if not rho[0] > 0:
        raise DegenerateScanError("predicted cardinality excludes the empty set")
    return pred.select(np.zeros(0, dtype=int), cardinality=rho / rho.sum())


def _cphd_update(pred, Z, m, cl, p_D, gate):
    if pred.cardinality is None:
        raise ValueError("CPHD update needs a cardinality distribution")
    rho = pred.cardinality
    n_max = rho.size - 1
    Zarr = np.asarray(Z, dtype=float).reshape(-1, m.n_z)
    M = len(Zarr)
    if not len(pred) or not pred.total_weight > 0:
        return _empty_update(pred)
    t = measurement_terms(pred, Zarr, m, cl, gate)
    a = detection_probs(pred, p_D)
    w = pred.weights

    log_cbar = _log(cl.density(Zarr)) if M else np.zeros(0)
    log_num = _log(a * w)[:, None] + t["logq"] - log_cbar[None, :]
    log_lam = logsumexp(log_num, axis=0) if M else np.zeros(0)
    shift = log_lam.max() if M and np.isfinite(log_lam.max()) else 0.0
    log_e = log_esf_with_exclusions(np.exp(log_lam - shift)) + np.arange(M + 1) * shift

    log_rho_c = _log(cl.cardinality_pmf(max(n_max, M)))
    log_miss = _log(np.dot(1.0 - a, w))
    log_total = np.log(w.sum())
    up0 = log_upsilon_terms(0, log_e[:1], M, log_rho_c, log_miss, log_total, n_max)[0]
    up1 = log_upsilon_terms(1, log_e[:1], M, log_rho_c, log_miss, log_total, n_max)[0]
    log_rho = _log(rho)
    norm = logsumexp(up0 + log_rho)
    if not np.isfinite(norm):
        raise DegenerateScanError("scan has zero likelihood under the predicted cardinality")
    ratio_miss = np.exp(logsumexp(up1 + log_rho) - norm)
    if M:
        up1_ex = log_upsilon_terms(1, log_e[1:, :M], M - 1, log_rho_c, log_miss, log_total, n_max)
        log_ratio_det = logsumexp(up1_ex + log_rho[None, :], axis=1) - norm
        w_det = np.exp(log_num + log_ratio_det[None, :])
    else:
        w_det = np.zeros((len(pred), 0))
    post = np.exp(up0 + log_rho - norm)
    post /= post.sum()
    return assemble_update(pred, t, w * (1.0 - a) * ratio_miss, w_det, cardinality=post)


def tcphd_update(pred: MixtureState, Z, m: LinearGaussianModel, cl: ClutterModel,
                 gate: float | None = DEFAULT_GATE) -> MixtureState:
    """Update step of the Beta-Gaussian trajectory CPHD filter.

    Component layout matches the PHD update. Misdetection weights are scaled by
    ``<Y1[Z], rho> / <Y0[Z], rho>``, detection weights by
    ``q/c * <Y1[Z minus z], rho> / <Y0[Z], rho>``, and the cardinality becomes
    ``Y0 * rho`` normalized.

    Raises
    ------
    DegenerateScanError
        if the scan has zero likelihood under the predicted cardinality.
    """
    if not pred.has_beta:
        raise ValueError("tcphd_update needs a Beta-Gaussian mixture")
    return _cphd_update(pred, Z, m, cl, None, gate)


def gm_tcphd_update(pred: MixtureState, Z, m: LinearGaussianModel, cl: ClutterModel, p_D: float,
                    gate: float | None = DEFAULT_GATE) -> MixtureState:
    """Update step of the Gaussian-mixture trajectory CPHD filter with known ``p_D``."""
    if pred.has_beta:
        raise ValueError("gm_tcphd_update needs a Gaussian mixture without Beta factors")
    return _cphd_update(pred, Z, m, cl, p_D, gate)
