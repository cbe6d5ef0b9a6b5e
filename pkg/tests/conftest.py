import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from utphd.core import BetaGaussianComponent, MixtureState  # noqa: E402
from utphd.models import BetaTransition, ClutterModel  # noqa: E402
from utphd.sim import make_scenario  # noqa: E402


@pytest.fixture
def scenario():
    return make_scenario("scenario1")


@pytest.fixture
def bt():
    return BetaTransition(1.05)


@pytest.fixture
def small_clutter():
    return ClutterModel(2.0, ((-10.0, 30.0), (-10.0, 30.0)))


def random_components(rng, J, *, window=1, beta=True):
    out = []
    for _ in range(J):
        A = rng.normal(size=(4 * window, 4 * window))
        cov = A @ A.T + np.eye(4 * window)
        out.append(BetaGaussianComponent(
            weight=float(rng.uniform(0.1, 1.0)), birth_time=1, length=window, head=np.zeros(0),
            window_mean=rng.uniform(0, 20, 4 * window), window_cov=cov,
            beta_u=float(rng.uniform(2, 9)) if beta else np.nan,
            beta_v=float(rng.uniform(1.5, 4)) if beta else np.nan))
    return out


def random_mixture(rng, J, *, window=1, beta=True, cardinality=None):
    return MixtureState.from_components(random_components(rng, J, window=window, beta=beta),
                                        window, window=window, cardinality=cardinality, beta=beta)


ACCEPTANCE_LINES: list[str] = []


def report_line(ok: bool, text: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def info_line(text: str) -> None:
    line = f"[INFO] {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
