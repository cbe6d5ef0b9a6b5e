"""Ground truth, detection profiles and measurement synthesis for the benchmark scenarios."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TrajectoryEstimate
from .models import BirthModel, ClutterModel, LinearGaussianModel

REGION = ((-2000.0, 2000.0), (0.0, 2000.0))
BIRTH_MEANS = [[-1500.0, 250.0, 0.0, 0.0], [-250.0, 1000.0, 0.0, 0.0],
               [250.0, 750.0, 0.0, 0.0], [1000.0, 1500.0, 0.0, 0.0]]

# initial state and [birth, death] scans of the ten crossing targets
TEN_TARGETS = [
    ([1005.0, 1489.0, 8.0, -10.0], 1, 100),
    ([-256.0, 1011.0, 20.0, 3.0], 10, 100),
    ([-1507.0, 257.0, 11.0, 10.0], 10, 100),
    ([-1500.0, 250.0, 43.0, 0.0], 10, 66),
    ([246.0, 735.0, 15.0, 5.0], 20, 80),
    ([-243.0, 993.0, -6.0, -12.0], 40, 100),
    ([1000.0, 1500.0, 1.0, -10.0], 40, 100),
    ([250.0, 750.0, -45.0, 10.0], 40, 80),
    ([1000.0, 1500.0, -50.0, 0.0], 60, 100),
    ([250.0, 750.0, -40.0, 25.0], 60, 100),
]


@dataclass(frozen=True)
class TruthTrajectory:
    id: int
    initial_state: np.ndarray
    birth_time: int
    death_time: int

    def __post_init__(self):
        if not 1 <= self.birth_time <= self.death_time:
            raise ValueError(f"target {self.id}: need 1 <= birth <= death")

    def alive(self, k: int) -> bool:
        return self.birth_time <= k <= self.death_time


@dataclass(frozen=True)
class DetectionProfile:
    """Detection probability per (target id, scan).

    ``constant`` applies to every target not listed in ``steps``. ``steps`` maps a
    target id to a list of ``(first_scan, p_D)`` pairs, sorted by scan; the last
    pair whose scan is <= k applies.
    """

    constant: float = 0.98
    steps: dict = field(default_factory=dict)

    def __post_init__(self):
        values = [self.constant] + [p for s in self.steps.values() for _, p in s]
        if any(not 0.0 <= p <= 1.0 for p in values):
            raise ValueError("detection probabilities must lie in [0, 1]")

    def __call__(self, target_id: int, k: int) -> float:
        p = self.constant
        for start, value in self.steps.get(target_id, ()):
            if k >= start:
                p = value
        return p

    def segments(self, target: TruthTrajectory):
        """Piecewise-constant ``(start, end, p_D)`` pieces over the target's lifetime."""
        cuts = [target.birth_time] + [s for s, _ in self.steps.get(target.id, ())
                                      if target.birth_time < s <= target.death_time]
        ends = cuts[1:] + [target.death_time + 1]
        return [(a, b - 1, self(target.id, a)) for a, b in zip(cuts, ends)]


@dataclass
class Scenario:
    name: str
    model: LinearGaussianModel
    birth: BirthModel
    clutter: ClutterModel
    targets: list
    profile: DetectionProfile
    n_scans: int = 100


def scenario_birth(u: float = 8.0, v: float = 2.0, weight: float = 0.01) -> BirthModel:
    return BirthModel.uniform(BIRTH_MEANS, np.diag([50.0**2] * 4), weight, u, v)


def make_scenario(name: str = "scenario1", *, u: float = 8.0, v: float = 2.0) -> Scenario:
    """Built-in scenario presets.

    ``scenario1`` runs ten targets with p_D = 0.98; ``scenario1-pd085`` and
    ``scenario1-pd073`` lower the detection probability; ``scenario2`` keeps three
    targets with per-target, time-varying detection.
    """
    m = LinearGaussianModel.constant_velocity(1.0, 1.0, 2.0, 0.99)
    cl = ClutterModel(20.0, REGION)
    b = scenario_birth(u, v)
    ten = [TruthTrajectory(i + 1, np.array(x), s, e) for i, (x, s, e) in enumerate(TEN_TARGETS)]
    pd = {"scenario1": 0.98, "scenario1-pd085": 0.85, "scenario1-pd073": 0.73}
    if name in pd:
        return Scenario(name, m, b, cl, ten, DetectionProfile(pd[name]))
    if name == "scenario2":
        targets = [TruthTrajectory(1, ten[0].initial_state, 1, 100),
                   TruthTrajectory(2, ten[1].initial_state, 20, 80),
                   TruthTrajectory(3, ten[2].initial_state, 30, 100)]
        profile = DetectionProfile(0.98, {1: [(1, 0.98), (56, 0.92)], 2: [(1, 0.85)],
                                          3: [(1, 0.75)]})
        return Scenario(name, m, b, cl, targets, profile)
    raise ValueError(f"unknown scenario {name!r}; choose from {sorted(pd) + ['scenario2']}")


def generate_truth(sc: Scenario) -> dict[int, np.ndarray]:
    """Noiseless constant-velocity states per target, shape (death - birth + 1, n_x)."""
    out = {}
    for tg in sc.targets:
        n = tg.death_time - tg.birth_time + 1
        x = np.empty((n, sc.model.n_x))
        x[0] = tg.initial_state
        for i in range(1, n):
            x[i] = sc.model.F @ x[i - 1]
        out[tg.id] = x
    return out


def truth_trajectories(sc: Scenario, states: dict, k: int) -> list[TrajectoryEstimate]:
    """True trajectories alive at scan ``k``, with their history up to ``k``."""
    out = []
    for tg in sc.targets:
        if tg.alive(k):
            n = k - tg.birth_time + 1
            out.append(TrajectoryEstimate(tg.birth_time, n, states[tg.id][:n],
                                          sc.profile(tg.id, k)))
    return out


def generate_measurements(sc: Scenario, states: dict, k: int, rng: np.random.Generator,
                          profile: DetectionProfile | None = None) -> np.ndarray:
    """One scan of measurements ``(M, n_z)``: detections plus clutter, shuffled.

    Detections falling outside the surveillance region are dropped.
    """
    profile = profile or sc.profile
    m, cl = sc.model, sc.clutter
    rows = []
    for tg in sc.targets:
        if not tg.alive(k):
            continue
        if rng.random() < profile(tg.id, k):
            x = states[tg.id][k - tg.birth_time]
            rows.append(m.H @ x + rng.multivariate_normal(np.zeros(m.n_z), m.R))
    Z = np.array(rows).reshape(-1, m.n_z)
    if len(Z):
        Z = Z[cl.inside(Z)]
    n_c = rng.poisson(cl.rate)
    lo = np.array([r[0] for r in cl.region])
    hi = np.array([r[1] for r in cl.region])
    clutter = lo + (hi - lo) * rng.random((n_c, len(lo)))
    Z = np.vstack([Z, clutter])
    return Z[rng.permutation(len(Z))]
