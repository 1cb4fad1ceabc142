import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qhdgeom import Constants, MadelungState, Scenario, VectorField
from qhdgeom.fields import AnalyticField

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_spd(rng, n=4, lo=0.2, hi=5.0):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ np.diag(rng.uniform(lo, hi, size=n)) @ q.T


def random_tangent(rng, y0_min=0.1):
    y = rng.normal(size=4)
    y[0] = y0_min + rng.uniform(0.0, 2.0)
    return y


def state(R="1", S="0"):
    return MadelungState(AnalyticField(R), AnalyticField(S))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def constant_q():
    """Q = -1, m = 2, so the associated metric is the identity."""
    return Scenario(V="-1", state=state(), consts=Constants(mass=2.0), name="constant_q")


@pytest.fixture(scope="session")
def neutral_q():
    """Q = -(1 + x^2) with m = 2."""
    return Scenario(V="-(1 + x^2)", VQ="0", consts=Constants(mass=2.0), name="neutral_q")


@pytest.fixture(scope="session")
def harmonic_ground():
    """Ground state of the unit oscillator, shifted so that U = -1/2."""
    return Scenario(V="0.5*x^2 - 1", state=state("exp(-0.5*x^2)"), name="harmonic_ground")


@pytest.fixture(scope="session")
def harmonic_classical():
    return Scenario(V="0.5*x^2 - 8", state=state(), name="harmonic_classical")


@pytest.fixture(scope="session")
def cyclotron():
    return Scenario(V="-3", VQ="0", A=VectorField.from_expressions(["-y/2", "x/2", "0"]), name="cyclotron")


@pytest.fixture(scope="session")
def charged():
    """Time-dependent, non-uniform electromagnetic scenario with a 2x2 coupled mass block."""
    return Scenario(
        V="-2 - 0.1*cos(x)*exp(-0.1*t)",
        phi="0.2*sin(y + 0.3*t)",
        A=VectorField.from_expressions(["0.3*sin(y)", "0.2*x*z + 0.1*t", "0.1*cos(x + t)"]),
        VQ="0.05*tanh(z)",
        mass_matrix=[[1.0, 0.2, 0.0], [0.2, 1.5, 0.1], [0.0, 0.1, 0.8]],
        name="charged",
    )


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
