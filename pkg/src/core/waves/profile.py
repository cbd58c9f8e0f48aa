"""
raywave - Wave Profile
F(z, psi) = exp(-i pi/4) integral_0^inf sqrt(rho) conj(g0~(omega rho)) V~(rho n(psi)) exp(i z rho) drho,
with g0~(xi) = (2 pi)^(-1/2) G0(xi, 0).
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from src.core.utils.logging import get_logger_with_context
from src.core.waves.errors import UnsupportedModeError
from src.core.waves.sources import (
    PolynomialSource,
    SineSource,
    SpatialSource,
    TemporalSourceBase,
)
from src.core.waves.special import I0_kernel, I0_moments

logger = get_logger_with_context(module="profile")

ProfileMode = Literal["closed_form", "quadrature", "instantaneous"]

_PHASE = complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4))
# Profile integrand is below exp(-ENVELOPE_DECADES) past rho = ENVELOPE_DECADES / beta
ENVELOPE_DECADES = 40.0


@dataclass(frozen=True)
class ProfileFn:
    """Everything F(z, psi) depends on."""

    temporal: TemporalSourceBase
    spatial: SpatialSource
    omega: float
    mode: ProfileMode = "closed_form"

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.mode == "closed_form":
            if not self.temporal.has_closed_form:
                raise UnsupportedModeError(
                    f"no closed-form profile for temporal kind {self.temporal.kind!r}"
                )
            if self.spatial.has_derivative:
                raise UnsupportedModeError("no closed-form profile for derivative-decorated sources")
        if self.mode == "instantaneous" and self.spatial.has_derivative:
            raise UnsupportedModeError("instantaneous profile is defined for plain sources only")

    def __call__(self, z, psi) -> np.ndarray:
        return wave_profile(self, z, psi)


def _prefactor(spatial: SpatialSource, omega: float) -> complex:
    return _PHASE * spatial.amplitude * spatial.b1 * spatial.b2 / (
        math.sqrt(2 * math.pi) * omega ** 1.5
    )


def _closed_form(pf: ProfileFn, z: np.ndarray, psi: np.ndarray) -> np.ndarray:
    beta = pf.spatial.beta(psi)
    C1 = (beta - 1j * z) / pf.omega
    pref = _prefactor(pf.spatial, pf.omega)
    temporal = pf.temporal
    if isinstance(temporal, SineSource):
        weights, offsets = temporal.poles(0.0)
        total = sum(weights[r] * I0_kernel(C1, offsets[r]) for r in range(offsets.size))
        return pref * total
    if isinstance(temporal, PolynomialSource):
        # P_k multiplies (1 - i s)^-(k+1), i.e. the moment of order k + 1
        moments = I0_moments(C1, 1.0 + 0j, temporal.degree + 1)[..., 1:]
        P = np.asarray(temporal.coefficients, dtype=float)
        return pref * np.sum(moments * P, axis=-1)
    raise UnsupportedModeError(f"no closed-form profile for {type(temporal).__name__}")


def _quadrature(pf: ProfileFn, z: np.ndarray, psi: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape, dtype=complex)
    for idx in np.ndindex(z.shape):
        zz, angle = float(z[idx]), float(psi[idx])
        upper = ENVELOPE_DECADES / float(pf.spatial.beta(angle))

        def integrand(rho):
            g = np.conj(pf.temporal.G0(pf.omega * rho, 0.0)) / math.sqrt(2 * math.pi)
            v = pf.spatial.fourier_polar(rho, angle)
            return complex(math.sqrt(rho) * g * v * np.exp(1j * zz * rho))

        re = integrate.quad(lambda r: integrand(r).real, 0.0, upper,
                            epsabs=1e-14, epsrel=1e-11, limit=400)[0]
        im = integrate.quad(lambda r: integrand(r).imag, 0.0, upper,
                            epsabs=1e-14, epsrel=1e-11, limit=400)[0]
        out[idx] = _PHASE * complex(re, im)
    return out


def instantaneous_profile(spatial: SpatialSource, z, psi) -> np.ndarray:
    """omega -> 0 limit: i A b1 b2 / (2 sqrt 2 (z + i beta(psi))^(3/2))."""
    z, psi = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(psi, dtype=float))
    beta = spatial.beta(psi)
    return 1j * spatial.amplitude * spatial.b1 * spatial.b2 / (
        2 * math.sqrt(2) * (z + 1j * beta) ** 1.5
    )


def wave_profile(pf: ProfileFn, z, psi) -> np.ndarray:
    """F(z, psi), broadcasting ``z`` against ``psi``."""
    z, psi = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(psi, dtype=float))
    if pf.mode == "closed_form":
        return _closed_form(pf, z, psi)
    if pf.mode == "quadrature":
        return _quadrature(pf, z, psi)
    if pf.mode == "instantaneous":
        return instantaneous_profile(pf.spatial, z, psi)
    raise UnsupportedModeError(f"unknown profile mode {pf.mode!r}")
