"""
raywave - Transient Moments
Closed forms of the radial integrals behind the transient component and the
equivalent sources, for Re z > 0:

    R(z; T) = integral_0^inf s Re G0(s, T) exp(-s z) ds
    Q(z)    = integral_0^inf Im G0(s, 0) exp(-s z) ds

Sine sources go through E1 (with ray-branch bookkeeping) for the poles at
1 +- i alpha and through Ci/Si for the pole at 1. Polynomial sources expand
Re/Im (1 + i s)^-m into powers of 1/(1 + s^2) and use
N_k = integral exp(-zs) (1+s^2)^-k ds, M_k = integral s exp(-zs) (1+s^2)^-k ds.
"""

import math
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
from scipy import integrate

from src.core.waves.errors import UnsupportedModeError
from src.core.waves.sources import (
    PolynomialSource,
    SineSource,
    TemporalSourceBase,
    im_G0_over_xi,
)
from src.core.waves.special import auxiliary_fg, ray_laplace_pole

ENVELOPE_DECADES = 40.0


def laplace_moments(z, k_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    N_k and M_k for k = 1 .. k_max, stacked on a trailing axis.

        M_{k+1} = (1 - z N_k) / (2k)
        N_{k+1} = (z M_k + (2k - 1) N_k) / (2k)
    """
    z = np.asarray(z, dtype=complex)
    N = np.empty(z.shape + (k_max,), dtype=complex)
    M = np.empty(z.shape + (k_max,), dtype=complex)
    N[..., 0], M[..., 0] = auxiliary_fg(z)
    for k in range(1, k_max):
        M[..., k] = (1.0 - z * N[..., k - 1]) / (2 * k)
        N[..., k] = (z * M[..., k - 1] + (2 * k - 1) * N[..., k - 1]) / (2 * k)
    return N, M


@lru_cache(maxsize=None)
def real_part_coefficients(m: int) -> Dict[int, int]:
    """Re (1 + i s)^-m = sum_k coef[k] (1 + s^2)^-k."""
    coef: Dict[int, int] = {}
    for i in range(m // 2 + 1):
        total = sum(math.comb(m, 2 * l) * math.comb(l, i) for l in range(i, m // 2 + 1))
        if total:
            coef[m - i] = (-1) ** i * total
    return coef


@lru_cache(maxsize=None)
def imag_part_coefficients(m: int) -> Dict[int, int]:
    """Im (1 + i s)^-m = s * sum_k coef[k] (1 + s^2)^-k."""
    coef: Dict[int, int] = {}
    top = (m - 1) // 2
    for i in range(top + 1):
        total = sum(math.comb(m, 2 * l + 1) * math.comb(l, i) for l in range(i, top + 1))
        if total:
            coef[m - i] = (-1) ** (i + 1) * total
    return coef


def _first_moment_of_pole(q: complex, z: np.ndarray) -> np.ndarray:
    """integral_0^inf s exp(-sz) / (s + q) ds."""
    return 1.0 / z - q * ray_laplace_pole(q, z)


def _sine_real_moment(src: SineSource, z: np.ndarray, T: float) -> np.ndarray:
    weights, offsets = src.poles(T)
    _, g = auxiliary_fg(z)
    total = weights[2].real * g
    for r in range(2):
        d = offsets[r]
        plus = -1j * _first_moment_of_pole(-1j * d, z)
        minus = 1j * _first_moment_of_pole(1j * d, z)
        total = total + 0.5 * weights[r] * (plus + minus)
    return total


def _sine_imag_moment(src: SineSource, z: np.ndarray) -> np.ndarray:
    weights, offsets = src.poles(0.0)
    _, g = auxiliary_fg(z)
    total = -weights[2].real * g
    for r in range(2):
        d = offsets[r]
        total = total - 0.5 * weights[r] * (ray_laplace_pole(-1j * d, z) + ray_laplace_pole(1j * d, z))
    return total


def _polynomial_moment(src: PolynomialSource, z: np.ndarray, T: float, part: str) -> np.ndarray:
    top = src.degree + 1
    _, M = laplace_moments(z, top)
    weights = src.taylor_weights(T)
    table = real_part_coefficients if part == "real" else imag_part_coefficients
    total = np.zeros(z.shape, dtype=complex)
    for j in range(src.degree + 1):
        if weights[j] == 0.0:
            continue
        for k, coef in table(j + 1).items():
            total = total + weights[j] * coef * M[..., k - 1]
    return math.exp(-T) * total


def real_moment(src: TemporalSourceBase, z, T: float) -> np.ndarray:
    """R(z; T) in closed form."""
    z = np.asarray(z, dtype=complex)
    if isinstance(src, SineSource):
        return _sine_real_moment(src, z, T)
    if isinstance(src, PolynomialSource):
        return _polynomial_moment(src, z, T, "real")
    raise UnsupportedModeError(f"no closed-form transient for {type(src).__name__}")


def imag_moment(src: TemporalSourceBase, z) -> np.ndarray:
    """Q(z) in closed form."""
    z = np.asarray(z, dtype=complex)
    if isinstance(src, SineSource):
        return _sine_imag_moment(src, z)
    if isinstance(src, PolynomialSource):
        return _polynomial_moment(src, z, 0.0, "imag")
    raise UnsupportedModeError(f"no closed-form equivalent source for {type(src).__name__}")


def _complex_quad(func, upper: float) -> complex:
    re = integrate.quad(lambda s: func(s).real, 0.0, upper, epsabs=1e-15, epsrel=1e-12, limit=400)[0]
    im = integrate.quad(lambda s: func(s).imag, 0.0, upper, epsabs=1e-15, epsrel=1e-12, limit=400)[0]
    return complex(re, im)


def real_moment_quadrature(src: TemporalSourceBase, z, T: float, power: int = 1) -> np.ndarray:
    """
    integral_0^smax s^power Re G0(s, T) exp(-s z) ds by adaptive Gauss-Kronrod,
    smax = ENVELOPE_DECADES / Re z.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    for idx in np.ndindex(z.shape):
        zz = complex(z[idx])
        upper = ENVELOPE_DECADES / zz.real
        out[idx] = _complex_quad(
            lambda s: s ** power * float(np.real(src.G0(s, T))) * np.exp(-s * zz), upper
        )
    return out


def imag_moment_quadrature(src: TemporalSourceBase, z, power: int = 0) -> np.ndarray:
    """integral_0^smax s^power Im G0(s, 0) exp(-s z) ds."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    for idx in np.ndindex(z.shape):
        zz = complex(z[idx])
        upper = ENVELOPE_DECADES / zz.real
        out[idx] = _complex_quad(
            lambda s: s ** (power + 1) * float(im_G0_over_xi(src, s)) * np.exp(-s * zz), upper
        )
    return out
