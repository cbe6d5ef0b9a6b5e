"""Motion, measurement, birth and clutter models plus the Beta transition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import BETA_FLOOR, BetaGaussianComponent, MixtureState
from .lscan import window_shift


@dataclass(frozen=True)
class LinearGaussianModel:
    F: np.ndarray
    Q: np.ndarray
    H: np.ndarray
    R: np.ndarray
    dt: float = 1.0
    p_S: float = 0.99

    def __post_init__(self):
        if not 0.0 < self.p_S <= 1.0:
            raise ValueError(f"survival probability must lie in (0, 1], got {self.p_S}")
        for name in ("Q", "R"):
            M = getattr(self, name)
            if not np.allclose(M, M.T):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(M).min() < -1e-12 * max(1.0, np.trace(M)):
                raise ValueError(f"{name} must be positive semidefinite")

    @property
    def n_x(self) -> int:
        return self.F.shape[0]

    @property
    def n_z(self) -> int:
        return self.H.shape[0]

    @classmethod
    def constant_velocity(cls, dt: float = 1.0, sigma_v2: float = 1.0, sigma_eps2: float = 2.0,
                          p_S: float = 0.99) -> LinearGaussianModel:
        """2-D constant-velocity model with state ``[px, py, vx, vy]`` and position measurements."""
        I2, Z2 = np.eye(2), np.zeros((2, 2))
        F = np.block([[I2, dt * I2], [Z2, I2]])
        Q = sigma_v2 * np.block([[dt**4 / 4 * I2, dt**3 / 2 * I2],
                                 [dt**3 / 2 * I2, dt**2 * I2]])
        H = np.hstack([I2, Z2])
        R = sigma_eps2 * I2
        return cls(F=F, Q=Q, H=H, R=R, dt=dt, p_S=p_S)


@dataclass(frozen=True)
class BetaTransition:
    """Moment-matched Beta prediction: keep the mean, inflate the variance by ``k_beta``."""

    k_beta: float = 1.05

    def __post_init__(self):
        if not abs(self.k_beta) >= 1.0:
            raise ValueError(f"|k_beta| must be >= 1, got {self.k_beta}")


def beta_moments(u, v):
    s = u + v
    return u / s, u * v / (s * s * (s + 1.0))


def beta_from_moments(mean, var, floor: float = BETA_FLOOR):
    """Inverse moment equations for a Beta density, clamped to ``u, v >= floor``."""
    scale = mean * (1.0 - mean) / var - 1.0
    return np.maximum(scale * mean, floor), np.maximum(scale * (1.0 - mean), floor)


def beta_predict(u, v, bt: BetaTransition):
    """Predict Beta parameters: mean unchanged, variance scaled by ``|k_beta|``.

    Works elementwise on arrays. Results are clamped to ``1 + 1e-6``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("Beta parameters must be finite")
    mean, var = beta_moments(u, v)
    u2, v2 = beta_from_moments(mean, abs(bt.k_beta) * var)
    if u2.ndim == 0:
        return float(u2), float(v2)
    return u2, v2


@dataclass(frozen=True)
class BirthModel:
    """Gaussian birth sites with Beta detection priors.

    ``cardinality`` is the birth count distribution used by CPHD filters; when
    omitted it is Poisson with mean ``weights.sum()``.
    """

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    beta_u: np.ndarray
    beta_v: np.ndarray
    cardinality: np.ndarray | None = None

    def __post_init__(self):
        if np.any(self.weights < 0):
            raise ValueError("birth weights must be nonnegative")

    @property
    def count(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, means, cov, weight: float, u: float, v: float) -> BirthModel:
        means = np.atleast_2d(np.asarray(means, dtype=float))
        J = len(means)
        return cls(weights=np.full(J, float(weight)), means=means,
                   covs=np.repeat(np.asarray(cov, dtype=float)[None], J, axis=0),
                   beta_u=np.full(J, float(u)), beta_v=np.full(J, float(v)))

    def cardinality_pmf(self, n_max: int) -> np.ndarray:
        if self.cardinality is not None:
            out = np.zeros(n_max + 1)
            c = np.asarray(self.cardinality, dtype=float)[: n_max + 1]
            out[: c.size] = c
        else:
            out = stats.poisson.pmf(np.arange(n_max + 1), self.weights.sum())
        return out / out.sum()


@dataclass(frozen=True)
class ClutterModel:
    """Poisson clutter, uniform over an axis-aligned rectangle ``region``."""

    rate: float
    region: tuple[tuple[float, float], ...]

    @property
    def area(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.region]))

    def inside(self, Z) -> np.ndarray:
        Z = np.atleast_2d(Z)
        lo = np.array([r[0] for r in self.region])
        hi = np.array([r[1] for r in self.region])
        return np.all((Z >= lo) & (Z <= hi), axis=-1)

    def density(self, Z) -> np.ndarray:
        return np.where(self.inside(Z), 1.0 / self.area, 0.0)

    def cardinality_pmf(self, n_max: int) -> np.ndarray:
        p = stats.poisson.pmf(np.arange(n_max + 1), self.rate)
        return p / p.sum()


def clutter_intensity(cl: ClutterModel, z) -> float:
    """``rate / area`` inside the region, zero outside."""
    return float(cl.rate * cl.density(np.asarray(z, dtype=float))[0])


def predict_state_block(c: BetaGaussianComponent, m: LinearGaussianModel,
                        bt: BetaTransition | None = None, window: int | None = None
                        ) -> BetaGaussianComponent:
    """Predict one surviving trajectory component one scan ahead."""
    g = window_shift(c, window, m.F, m.Q)
    u, v = c.beta_u, c.beta_v
    if bt is not None and not np.isnan(u):
        u, v = beta_predict(u, v, bt)
    return BetaGaussianComponent(
        weight=m.p_S * c.weight, birth_time=c.birth_time, length=g.length, head=g.head,
        window_mean=g.window_mean, window_cov=g.window_cov, beta_u=u, beta_v=v)


def birth_components(b: BirthModel, k: int) -> list[BetaGaussianComponent]:
    """Length-one trajectories born at scan ``k``."""
    return [BetaGaussianComponent(weight=float(b.weights[j]), birth_time=k, length=1,
                                  head=np.zeros(0), window_mean=np.array(b.means[j], dtype=float),
                                  window_cov=np.array(b.covs[j], dtype=float),
                                  beta_u=float(b.beta_u[j]), beta_v=float(b.beta_v[j]))
            for j in range(b.count)]


def birth_mixture(b: BirthModel, k: int, W: int, *, beta: bool, window, cardinality=None
                  ) -> MixtureState:
    """Birth components laid out in a ``W``-slot window (padding on the left)."""
    J, n = b.means.shape
    means = np.zeros((J, W, n))
    means[:, -1] = b.means
    covs = np.zeros((J, W * n, W * n))
    covs[:, -n:, -n:] = b.covs
    return MixtureState(
        time=k, weights=np.array(b.weights, dtype=float), birth_times=np.full(J, k),
        lengths=np.ones(J, dtype=int), means=means, covs=covs, cov_index=np.arange(J),
        heads=np.full(J, None, dtype=object),
        beta_u=np.array(b.beta_u, dtype=float) if beta else None,
        beta_v=np.array(b.beta_v, dtype=float) if beta else None,
        cardinality=cardinality, window=window)
