"""Shared test fixtures for raywave."""

import math

import numpy as np
import pytest
from fastapi.testclient import TestClient
from httpx import AsyncClient, ASGITransport
from scipy import integrate

from src.core.waves.sources import PolynomialSource, ScaleParams, SineSource, SpatialSource
from src.core.waves.velocity import ConstantVelocity, gaussian_lens
from src.main import app


@pytest.fixture
def client():
    """Synchronous test client."""
    return TestClient(app)


@pytest.fixture
async def async_client():
    """Async test client for async endpoints."""
    transport = ASGITransport(app=app)
    async with AsyncClient(transport=transport, base_url="http://test") as ac:
        yield ac


@pytest.fixture
def sine_source():
    """g0 = a exp(-tau) sin(2 tau)."""
    return SineSource(alpha=2.0)


@pytest.fixture
def shifted_sine_source():
    """Sine source with a nonzero phase, so all three poles carry weight."""
    return SineSource(alpha=1.5, phi0=0.3)


@pytest.fixture
def polynomial_source():
    """g0 = tau^2 exp(-tau) / 2 (P1 = 0, P2 = 1)."""
    return PolynomialSource(coefficients=[0.0, 1.0])


@pytest.fixture
def spatial_source():
    """Elliptic source with b1 = 1, b2 = 2."""
    return SpatialSource(amplitude=1.0, b1=1.0, b2=2.0)


@pytest.fixture
def rotated_source():
    return SpatialSource(amplitude=0.7, b1=1.0, b2=1.5, theta=0.4)


@pytest.fixture
def scales():
    """lambda = 10, mu = 0.1, c0 = 1, so omega = 1."""
    return ScaleParams(lam=10.0, mu=0.1, c0=1.0)


@pytest.fixture
def constant_velocity():
    return ConstantVelocity(1.0)


@pytest.fixture
def offset_lens():
    """Focusing dip two units along x; rays near psi = 0 cross behind it."""
    return gaussian_lens(depth=0.3, center=[2.0, 0.0], width=1.0)


@pytest.fixture
def laplace_quadrature():
    """
    integral_0^inf f(s) exp(-z s) ds for complex-valued f and Re z > 0,
    using QAWO weights for the oscillating factor.
    """

    def compute(f, z: complex, decades: float = 40.0) -> complex:
        a, b = z.real, z.imag
        upper = decades / a

        def part(g, weight):
            if b == 0.0:
                if weight == "sin":
                    return 0.0
                return integrate.quad(lambda s: g(s) * math.exp(-a * s), 0.0, upper,
                                      epsabs=1e-15, epsrel=1e-12, limit=1000)[0]
            return integrate.quad(lambda s: g(s) * math.exp(-a * s), 0.0, upper, weight=weight,
                                  wvar=b, epsabs=1e-15, epsrel=1e-12, limit=1000)[0]

        fr = lambda s: complex(f(s)).real
        fi = lambda s: complex(f(s)).imag
        re = part(fr, "cos") + part(fi, "sin")
        im = part(fi, "cos") - part(fr, "sin")
        return complex(re, im)

    return compute


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
