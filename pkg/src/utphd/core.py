"""Beta-Gaussian trajectory components and the mixture container.

A mixture is stored column-wise: per-component scalars live in 1-D arrays, the
L-scan window means live in a ``(J, W, n_x)`` array that is right-aligned (the
last slot is always the current time step, unused leading slots are zero), and
window covariances live in a table ``covs`` addressed through ``cov_index`` so
that the detection branches of one predicted component can share a single
posterior covariance.

States outside the window are frozen. They are kept as a persistent linked
list ``(older_node, state)`` per component, so branching a component never
copies its history.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class StructureError(ValueError):
    """Inconsistent component dimensions."""


class NumericalError(ArithmeticError):
    """A numerical failure tied to a mixture component."""

    def __init__(self, message: str, component: int | None = None):
        super().__init__(message if component is None else f"{message} (component {component})")
        self.component = component


class DegenerateScanError(NumericalError):
    """The scan has zero likelihood under the predicted cardinality."""


BETA_FLOOR = 1.0 + 1e-6


@dataclass(frozen=True, eq=False)
class BetaGaussianComponent:
    """One term of a Beta-Gaussian trajectory mixture.

    ``head`` holds the frozen states older than the window, flattened;
    ``window_mean``/``window_cov`` describe the jointly Gaussian last
    ``min(length, L)`` states. ``beta_u``/``beta_v`` are NaN for known-detection
    (plain Gaussian) mixtures.
    """

    weight: float
    birth_time: int
    length: int
    head: np.ndarray
    window_mean: np.ndarray
    window_cov: np.ndarray
    beta_u: float = np.nan
    beta_v: float = np.nan

    def __post_init__(self):
        if self.length < 1:
            raise StructureError(f"length must be >= 1, got {self.length}")
        total = self.head.size + self.window_mean.size
        if total % self.length:
            raise StructureError(
                f"head ({self.head.size}) + window ({self.window_mean.size}) "
                f"is not a multiple of length {self.length}")
        n_x = total // self.length
        if self.window_mean.size % n_x or self.window_mean.size == 0:
            raise StructureError("window mean does not hold whole states")
        d = self.window_mean.size
        if self.window_cov.shape != (d, d):
            raise StructureError(f"window covariance shape {self.window_cov.shape} != ({d}, {d})")

    @property
    def n_x(self) -> int:
        return (self.head.size + self.window_mean.size) // self.length

    @property
    def window_length(self) -> int:
        return self.window_mean.size // self.n_x


@dataclass(frozen=True)
class TrajectoryEstimate:
    """An extracted trajectory: birth time, state sequence and detection probability."""

    birth_time: int
    length: int
    states: np.ndarray
    detection_prob: float = np.nan

    @property
    def end_time(self) -> int:
        return self.birth_time + self.length - 1


def current_state_marginal(c: BetaGaussianComponent) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the most recent state of a trajectory component."""
    n = c.n_x
    return c.window_mean[-n:].copy(), c.window_cov[-n:, -n:].copy()


def expected_detection(c: BetaGaussianComponent) -> float:
    """Mean of the Beta detection-probability factor, ``u / (u + v)``."""
    return c.beta_u / (c.beta_u + c.beta_v)


def full_trajectory(c: BetaGaussianComponent) -> np.ndarray:
    """All ``length`` states of ``c`` as a ``(length, n_x)`` array."""
    flat = np.concatenate([c.head, c.window_mean])
    if flat.size % c.length:
        raise StructureError("trajectory does not reshape to its length")
    return flat.reshape(c.length, -1)


def head_states(node, count: int, n_x: int) -> np.ndarray:
    """Materialise ``count`` frozen states from a linked head node."""
    out = np.empty((count, n_x))
    for i in range(count - 1, -1, -1):
        node, out[i] = node
    return out


@dataclass(eq=False)
class MixtureState:
    """Posterior (or predicted) Beta-Gaussian trajectory mixture at scan ``time``.

    ``window`` is the L-scan length (``None`` keeps whole trajectories in the
    window). ``cardinality`` is present for CPHD-type filters only.
    """

    time: int
    weights: np.ndarray
    birth_times: np.ndarray
    lengths: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    cov_index: np.ndarray
    heads: np.ndarray
    beta_u: np.ndarray | None = None
    beta_v: np.ndarray | None = None
    cardinality: np.ndarray | None = None
    window: int | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, n_x: int, time: int = 0, *, beta: bool = True, window: int | None = None,
              n_max: int | None = None) -> MixtureState:
        """An empty mixture; with ``n_max`` the cardinality is a point mass at zero."""
        card = None
        if n_max is not None:
            card = np.zeros(n_max + 1)
            card[0] = 1.0
        return cls(
            time=time,
            weights=np.zeros(0),
            birth_times=np.zeros(0, dtype=int),
            lengths=np.zeros(0, dtype=int),
            means=np.zeros((0, 1, n_x)),
            covs=np.zeros((0, n_x, n_x)),
            cov_index=np.zeros(0, dtype=int),
            heads=np.empty(0, dtype=object),
            beta_u=np.zeros(0) if beta else None,
            beta_v=np.zeros(0) if beta else None,
            cardinality=card,
            window=window,
        )

    @classmethod
    def from_components(cls, components: list[BetaGaussianComponent], time: int, *,
                        window: int | None = None, cardinality=None,
                        beta: bool | None = None) -> MixtureState:
        if not components:
            n_max = None if cardinality is None else len(cardinality) - 1
            out = cls.empty(1, time, beta=bool(beta), window=window, n_max=n_max)
            if cardinality is not None:
                out.cardinality = np.asarray(cardinality, dtype=float)
            return out
        n_x = components[0].n_x
        W = max(c.window_length for c in components)
        J = len(components)
        means = np.zeros((J, W, n_x))
        covs = np.zeros((J, W * n_x, W * n_x))
        heads = np.empty(J, dtype=object)
        for j, c in enumerate(components):
            w = c.window_length
            means[j, W - w:] = c.window_mean.reshape(w, n_x)
            covs[j, (W - w) * n_x:, (W - w) * n_x:] = c.window_cov
            node = None
            for s in c.head.reshape(-1, n_x):
                node = (node, s.copy())
            heads[j] = node
        if beta is None:
            beta = not np.isnan(components[0].beta_u)
        return cls(
            time=time,
            weights=np.array([c.weight for c in components], dtype=float),
            birth_times=np.array([c.birth_time for c in components], dtype=int),
            lengths=np.array([c.length for c in components], dtype=int),
            means=means,
            covs=covs,
            cov_index=np.arange(J),
            heads=heads,
            beta_u=np.array([c.beta_u for c in components], dtype=float) if beta else None,
            beta_v=np.array([c.beta_v for c in components], dtype=float) if beta else None,
            cardinality=None if cardinality is None else np.asarray(cardinality, dtype=float),
            window=window,
        )

    def __len__(self) -> int:
        return self.weights.size

    @property
    def n_x(self) -> int:
        return self.means.shape[2]

    @property
    def has_beta(self) -> bool:
        return self.beta_u is not None

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def window_lengths(self) -> np.ndarray:
        return np.minimum(self.lengths, self.means.shape[1])

    def current_means(self) -> np.ndarray:
        return self.means[:, -1, :]

    def current_covs(self) -> np.ndarray:
        n = self.n_x
        return self.covs[self.cov_index, -n:, -n:]

    def detection_means(self) -> np.ndarray:
        return self.beta_u / (self.beta_u + self.beta_v)

    def gathered_covs(self) -> np.ndarray:
        """Full window covariance per component, ``(J, D, D)``."""
        if self.cov_index.size == self.covs.shape[0] and np.array_equal(
                self.cov_index, np.arange(self.cov_index.size)):
            return self.covs
        return self.covs[self.cov_index]

    def select(self, idx, **overrides) -> MixtureState:
        """Sub-mixture with components ``idx`` (index array or boolean mask).

        Unreferenced covariances are dropped from the table.
        """
        idx = np.asarray(idx)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        used, remap = np.unique(self.cov_index[idx], return_inverse=True)
        fields = dict(
            time=self.time,
            weights=self.weights[idx],
            birth_times=self.birth_times[idx],
            lengths=self.lengths[idx],
            means=self.means[idx],
            covs=self.covs[used],
            cov_index=remap.reshape(-1),
            heads=self.heads[idx],
            beta_u=None if self.beta_u is None else self.beta_u[idx],
            beta_v=None if self.beta_v is None else self.beta_v[idx],
            cardinality=self.cardinality,
            window=self.window,
        )
        fields.update(overrides)
        return MixtureState(**fields)

    def component(self, j: int) -> BetaGaussianComponent:
        n = self.n_x
        W = self.means.shape[1]
        w = int(min(self.lengths[j], W))
        length = int(self.lengths[j])
        head = head_states(self.heads[j], length - w, n).reshape(-1)
        cov = self.covs[self.cov_index[j], (W - w) * n:, (W - w) * n:]
        return BetaGaussianComponent(
            weight=float(self.weights[j]),
            birth_time=int(self.birth_times[j]),
            length=length,
            head=head,
            window_mean=self.means[j, W - w:].reshape(-1).copy(),
            window_cov=cov.copy(),
            beta_u=float(self.beta_u[j]) if self.has_beta else np.nan,
            beta_v=float(self.beta_v[j]) if self.has_beta else np.nan,
        )

    @property
    def components(self) -> list[BetaGaussianComponent]:
        return [self.component(j) for j in range(len(self))]

    def trajectory(self, j: int) -> np.ndarray:
        """All states of component ``j`` as ``(length, n_x)``."""
        W = self.means.shape[1]
        w = int(min(self.lengths[j], W))
        head = head_states(self.heads[j], int(self.lengths[j]) - w, self.n_x)
        return np.concatenate([head, self.means[j, W - w:]])
