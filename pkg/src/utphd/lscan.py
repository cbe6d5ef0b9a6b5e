"""L-scan window mechanics shared by the trajectory filters.

Windows are right-aligned: slot ``-1`` is the current state. A window that is
not yet full carries zero padding in its leading slots; padding never enters a
sum because every block product below contracts over a single state or
measurement dimension, so a short window gives bit-identical results whether
or not it is padded.
"""
from __future__ import annotations

import numpy as np

from .core import BetaGaussianComponent, MixtureState, NumericalError, StructureError

COND_LIMIT = 1e12


def predict_windows(means, covs, lengths, F, Q, window):
    """Append the predicted next state to every window and trim to ``window``.

    Parameters
    ----------
    means : (J, W, n) right-aligned window means
    covs : (J, W*n, W*n) window covariances
    lengths : (J,) trajectory lengths before prediction
    window : L, or None for no trimming

    Returns
    -------
    means, covs : predicted windows (W grows by one slot while W < L and some
        trajectory already fills its window)
    frozen : (J,) bool, components whose oldest window state left the window
    frozen_states : (J, n) the states that left (meaningful where ``frozen``)
    """
    J, W, n = means.shape
    if (window is None or W < window) and J and (lengths >= W).any():
        means = np.concatenate([np.zeros((J, 1, n)), means], axis=1)
        D = (W + 1) * n
        padded = np.zeros((J, D, D))
        padded[:, n:, n:] = covs
        covs = padded
        W += 1
    frozen = lengths >= W
    frozen_states = means[:, 0, :].copy()

    D = W * n
    new_means = np.empty_like(means)
    new_means[:, :-1] = means[:, 1:]
    new_means[:, -1] = means[:, -1] @ F.T

    new_covs = np.empty((J, D, D))
    cross = covs[:, n:, -n:] @ F.T
    new_covs[:, :-n, :-n] = covs[:, n:, n:]
    new_covs[:, :-n, -n:] = cross
    new_covs[:, -n:, :-n] = np.swapaxes(cross, 1, 2)
    new_covs[:, -n:, -n:] = F @ covs[:, -n:, -n:] @ F.T + Q
    return new_means, new_covs, frozen, frozen_states


def kalman_terms(means, covs, H, R, *, check=True):
    """Per-component innovation statistics and gains for the current state.

    Returns a dict with ``zbar`` (J, nz), ``S`` (J, nz, nz), ``S_inv``, ``logdet``,
    ``K`` (J, D, nz) acting on the whole window, and ``post_covs`` (J, D, D).
    The posterior covariance does not depend on the measurement.
    """
    n = means.shape[2]
    zbar = means[:, -1, :] @ H.T
    S = H @ covs[:, -n:, -n:] @ H.T + R
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    if check and len(S):
        cond = np.linalg.cond(S)
        bad = np.flatnonzero(~(cond <= COND_LIMIT))
        if bad.size:
            raise NumericalError(f"innovation covariance condition number {cond[bad[0]]:.3g}",
                                 int(bad[0]))
    S_inv = np.linalg.inv(S)
    S_inv = 0.5 * (S_inv + np.swapaxes(S_inv, 1, 2))
    _, logdet = np.linalg.slogdet(S)
    K = covs[:, :, -n:] @ H.T @ S_inv
    post = covs - K @ (H @ covs[:, -n:, :])
    post = 0.5 * (post + np.swapaxes(post, 1, 2))
    return dict(zbar=zbar, S=S, S_inv=S_inv, logdet=logdet, K=K, post_covs=post)


def _single(c: BetaGaussianComponent):
    n = c.n_x
    w = c.window_length
    return c.window_mean.reshape(1, w, n), c.window_cov[None], n, w


def window_shift(c: BetaGaussianComponent, L: int | None, F, Q) -> BetaGaussianComponent:
    """Gaussian part of one prediction step under an L-scan window.

    For ``length < L`` (or ``L is None``) the window grows by one state; otherwise
    the oldest window state is frozen into the head. Weight and Beta factors are
    carried over unchanged.
    """
    if L is not None and L < 1:
        raise StructureError("window length must be >= 1")
    means, covs, _, _ = _single(c)
    means, covs, frozen, out = predict_windows(means, covs, np.array([c.length]), F, Q, L)
    head = c.head
    if frozen[0]:
        head = np.concatenate([c.head, out[0]])
    return BetaGaussianComponent(
        weight=c.weight, birth_time=c.birth_time, length=c.length + 1, head=head,
        window_mean=means[0].reshape(-1), window_cov=covs[0],
        beta_u=c.beta_u, beta_v=c.beta_v)


def windowed_kalman(c: BetaGaussianComponent, z, H, R) -> BetaGaussianComponent:
    """Kalman update of the window of ``c`` with measurement ``z``; head untouched."""
    means, covs, n, w = _single(c)
    t = kalman_terms(means, covs, H, R)
    mean = means[0].reshape(-1) + t["K"][0] @ (np.asarray(z, dtype=float) - t["zbar"][0])
    return BetaGaussianComponent(
        weight=c.weight, birth_time=c.birth_time, length=c.length, head=c.head,
        window_mean=mean, window_cov=t["post_covs"][0], beta_u=c.beta_u, beta_v=c.beta_v)


def predict_mixture_windows(mix: MixtureState, F, Q):
    """Window prediction for every component of ``mix``.

    Returns ``(means, covs, heads)`` for the surviving part of the predicted mixture.
    """
    means, covs, frozen, out = predict_windows(mix.means, mix.gathered_covs(), mix.lengths,
                                               F, Q, mix.window)
    heads = mix.heads.copy()
    for j in np.flatnonzero(frozen):
        heads[j] = (heads[j], out[j])
    return means, covs, heads
