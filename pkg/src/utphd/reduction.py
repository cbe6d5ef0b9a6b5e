"""Mixture reduction: pruning, greedy absorption with Beta moment matching, capping.

The cardinality vector of a CPHD mixture passes through untouched.
"""
from __future__ import annotations

import numpy as np

from .core import MixtureState
from .models import beta_from_moments, beta_moments


def prune(mix: MixtureState, T_p: float) -> MixtureState:
    """Keep components with weight strictly above ``T_p``."""
    if T_p < 0:
        raise ValueError("T_p must be nonnegative")
    keep = mix.weights > T_p
    if keep.all():
        return mix
    return mix.select(keep)


def absorb(mix: MixtureState, T_a: float) -> MixtureState:
    """Greedy absorption of nearby components into the heaviest one.

    Repeatedly takes the heaviest remaining component ``j`` and absorbs every
    remaining component whose current state lies within squared Mahalanobis
    distance ``T_a`` of ``j``, measured with ``j``'s current-state covariance
    (so the test is not symmetric). The survivor keeps ``j``'s trajectory and
    covariance; weights add, and the Beta factor is refitted to the
    weight-averaged mean and variance of the absorbed Betas.

    Parameters
    ----------
    mix : MixtureState
    T_a : float
        Squared-distance threshold, > 0.

    Returns
    -------
    MixtureState
        Components in order of emission (heaviest first).
    """
    if not T_a > 0:
        raise ValueError("T_a must be positive")
    J = len(mix)
    if J <= 1:
        return mix
    x = mix.current_means()
    covs = mix.current_covs()
    w = mix.weights
    if mix.has_beta:
        mu, var = beta_moments(mix.beta_u, mix.beta_v)
    alive = np.ones(J, dtype=bool)
    # stable descending order so equal weights resolve to the lower index
    order = np.argsort(-w, kind="stable")
    keep, weights, bu, bv = [], [], [], []
    pos = 0
    while pos < J:
        j = order[pos]
        pos += 1
        if not alive[j]:
            continue
        idx = np.flatnonzero(alive)
        d = x[idx] - x[j]
        sol = np.linalg.solve(covs[j], d.T).T
        members = idx[np.einsum("ij,ij->i", d, sol) <= T_a]
        members = np.union1d(members, [j])
        alive[members] = False
        wm = w[members]
        total = wm.sum()
        keep.append(j)
        weights.append(total)
        if mix.has_beta:
            if members.size == 1:
                bu.append(mix.beta_u[j])
                bv.append(mix.beta_v[j])
            else:
                m_bar = np.dot(wm, mu[members]) / total
                v_bar = np.dot(wm, var[members]) / total
                u_new, v_new = beta_from_moments(m_bar, v_bar)
                bu.append(float(u_new))
                bv.append(float(v_new))
    overrides = dict(weights=np.array(weights))
    if mix.has_beta:
        overrides.update(beta_u=np.array(bu), beta_v=np.array(bv))
    return mix.select(np.array(keep, dtype=int), **overrides)


def ranking(mix: MixtureState) -> np.ndarray:
    """Component indices by weight desc, birth time asc, index asc."""
    J = len(mix)
    return np.lexsort((np.arange(J), mix.birth_times, -mix.weights))


def cap(mix: MixtureState, J_max: int) -> MixtureState:
    """Keep the ``J_max`` heaviest components (ties: earlier birth, then lower index)."""
    if J_max < 1:
        raise ValueError("J_max must be >= 1")
    if len(mix) <= J_max:
        return mix
    return mix.select(np.sort(ranking(mix)[:J_max]))


def reduce_mixture(mix: MixtureState, T_p: float = 1e-5, T_a: float = 4.0,
                   J_max: int = 100) -> MixtureState:
    """prune, then absorb, then cap."""
    return cap(absorb(prune(mix, T_p), T_a), J_max)
