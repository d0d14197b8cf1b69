import numpy as np
import pytest

from rotoseen import PhysParams
from rotoseen.expansion import beta_coefficients, manufactured_flow
from rotoseen.suites import FLOW_SETUP


@pytest.fixture(scope="session")
def p():
    return PhysParams(tau=1.0, rho=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def flow_bundle(p):
    """Manufactured linearized flow of the expansion checks (expensive)."""
    s = FLOW_SETUP
    flow, force = manufactured_flow(s["y0"], s["c"], s["eps"], s["S0"], p, return_force=True)
    return flow, force, beta_coefficients(flow, p)


@pytest.fixture(scope="session")
def flow_bundle_large(p):
    """Same forcing, sphere radius scaled by 1.5."""
    s = FLOW_SETUP
    flow = manufactured_flow(s["y0"], s["c"], s["eps"], 1.5 * s["S0"], p)
    return flow, beta_coefficients(flow, p)
