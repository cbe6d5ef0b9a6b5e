"""Trajectory estimates from a posterior mixture."""
from __future__ import annotations

import numpy as np

from .core import MixtureState, TrajectoryEstimate
from .reduction import ranking


def estimate_count_tphd(mix: MixtureState) -> int:
    """Total weight rounded half up, floored at 0 and capped at the component count."""
    n = int(np.floor(mix.total_weight + 0.5)) if len(mix) else 0
    return max(0, min(n, len(mix)))


def estimate_count_tcphd(mix: MixtureState) -> int:
    """Mode of the cardinality distribution; ties go to the smaller count."""
    if mix.cardinality is None:
        raise ValueError("mixture carries no cardinality distribution")
    return int(np.argmax(mix.cardinality))


def extract(mix: MixtureState, N: int) -> list[TrajectoryEstimate]:
    """The ``N`` heaviest components as trajectory estimates.

    Order is weight desc, birth time asc, index asc. ``detection_prob`` is the
    Beta mean, or NaN for a mixture without Beta factors.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    out = []
    for j in ranking(mix)[:N]:
        p = float(mix.beta_u[j] / (mix.beta_u[j] + mix.beta_v[j])) if mix.has_beta else np.nan
        out.append(TrajectoryEstimate(birth_time=int(mix.birth_times[j]),
                                      length=int(mix.lengths[j]),
                                      states=mix.trajectory(j), detection_prob=p))
    return out
