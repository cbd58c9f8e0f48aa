"""
raywave - Source Models
Scale parameters, the ellipsoidal spatial factor V(y) and the temporal factor
g0(tau) together with their transforms V~(p) and G0(xi, t).

Fourier convention: V~(p) = (2 pi)^-1 * integral V(y) exp(-i <p, y>) dy, with
inverse V(y) = (2 pi)^-1 * integral V~(p) exp(i <p, y>) dp.
"""

import math
from typing import Annotated, List, Literal, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    computed_field,
    field_validator,
    model_validator,
)
from scipy import integrate, interpolate

from src.core.utils.logging import get_logger_with_context

logger = get_logger_with_context(module="sources")

# Highest polynomial degree with a closed-form transform
MAX_POLYNOMIAL_DEGREE = 8
# Sample offset for the removable singularity of Im G0(z)/z at z = 0
F2_EXTRAPOLATION_STEP = 1.0e-4


class ScaleParams(BaseModel):
    """Problem scales. omega is always derived, never stored."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(gt=0, alias="lambda", description="source decay rate, 1/time")
    mu: float = Field(gt=0, description="source size, length")
    c0: float = Field(gt=0, description="velocity at the origin")
    nu: float = Field(default=1.0, gt=0, description="temporal decay exponent")

    @computed_field
    @property
    def omega(self) -> float:
        return self.c0 / (self.lam * self.mu)


# ============================================
# Spatial factor
# ============================================

class SpatialSource(BaseModel):
    """
    Ellipsoidal source V(y) = A (1 + (y1'/b1)^2 + (y2'/b2)^2)^(-3/2), y' = T(theta) y,
    optionally differentiated by a constant multi-index before the rotation.
    """

    model_config = ConfigDict(frozen=True)

    amplitude: float = Field(default=1.0)
    b1: float = Field(gt=0)
    b2: float = Field(gt=0)
    theta: float = Field(default=0.0)
    deriv: Tuple[int, int] = Field(default=(0, 0))

    @field_validator("deriv")
    @classmethod
    def validate_deriv(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        if min(v) < 0:
            raise ValueError("derivative orders must be nonnegative")
        if sum(v) > 2:
            raise ValueError("derivative multi-index of total order above 2 is not supported")
        return v

    @property
    def has_derivative(self) -> bool:
        return self.deriv != (0, 0)

    @property
    def b_min(self) -> float:
        return min(self.b1, self.b2)

    @property
    def b_max(self) -> float:
        return max(self.b1, self.b2)

    def rotate(self, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Apply T(theta) to vectors stored along the last axis."""
        v = np.asarray(v, dtype=float)
        c, s = math.cos(self.theta), math.sin(self.theta)
        return c * v[..., 0] + s * v[..., 1], -s * v[..., 0] + c * v[..., 1]

    def beta(self, psi) -> np.ndarray:
        """Exponential rate of V~ along the ray p = rho n(psi)."""
        phase = np.asarray(psi, dtype=float) - self.theta
        return np.sqrt((self.b1 * np.cos(phase)) ** 2 + (self.b2 * np.sin(phase)) ** 2)

    def derivative_factor(self, rho, psi) -> np.ndarray:
        """(i p')^deriv for p = rho n(psi); identically one without a derivative."""
        d1, d2 = self.deriv
        phase = np.asarray(psi, dtype=float) - self.theta
        rho = np.asarray(rho, dtype=float)
        return (1j * rho * np.cos(phase)) ** d1 * (1j * rho * np.sin(phase)) ** d2

    def evaluate(self, y) -> np.ndarray:
        u1, u2 = self.rotate(y)
        u1, u2 = u1 / self.b1, u2 / self.b2
        s = 1.0 + u1 ** 2 + u2 ** 2
        a = self.amplitude
        d1, d2 = self.deriv
        if (d1, d2) == (0, 0):
            return a * s ** -1.5
        if (d1, d2) == (1, 0):
            return -3.0 * a * u1 * s ** -2.5 / self.b1
        if (d1, d2) == (0, 1):
            return -3.0 * a * u2 * s ** -2.5 / self.b2
        if (d1, d2) == (2, 0):
            return -3.0 * a * (s ** -2.5 - 5.0 * u1 ** 2 * s ** -3.5) / self.b1 ** 2
        if (d1, d2) == (0, 2):
            return -3.0 * a * (s ** -2.5 - 5.0 * u2 ** 2 * s ** -3.5) / self.b2 ** 2
        return 15.0 * a * u1 * u2 * s ** -3.5 / (self.b1 * self.b2)

    def fourier(self, p) -> np.ndarray:
        q1, q2 = self.rotate(p)
        base = self.amplitude * self.b1 * self.b2 * np.exp(
            -np.sqrt((self.b1 * q1) ** 2 + (self.b2 * q2) ** 2)
        )
        d1, d2 = self.deriv
        return base * (1j * q1) ** d1 * (1j * q2) ** d2

    def fourier_polar(self, rho, psi) -> np.ndarray:
        """V~(rho n(psi))."""
        rho = np.asarray(rho, dtype=float)
        base = self.amplitude * self.b1 * self.b2 * np.exp(-rho * self.beta(psi))
        if not self.has_derivative:
            return base.astype(complex)
        return base * self.derivative_factor(rho, psi)


def eval_spatial(src: SpatialSource, y) -> np.ndarray:
    """V(y) for points stored along the last axis of ``y``."""
    return src.evaluate(y)


def eval_spatial_fourier(src: SpatialSource, p) -> np.ndarray:
    """V~(p) = A b1 b2 exp(-sqrt(b1^2 p1'^2 + b2^2 p2'^2)) (i p')^deriv, p' = T(theta) p."""
    return src.fourier(p)


# ============================================
# Temporal factor
# ============================================

class TemporalSourceBase(BaseModel):
    """Shared interface of the temporal source kinds."""

    # Length of [0, tail) outside which g0 is below double-precision noise
    tail_length: float = Field(default=60.0, gt=0, exclude=True)

    def g0(self, tau) -> np.ndarray:
        raise NotImplementedError

    def g0_prime(self, tau) -> np.ndarray:
        raise NotImplementedError

    def G0(self, xi, t=0.0) -> np.ndarray:
        raise NotImplementedError

    @property
    def has_closed_form(self) -> bool:
        return True

    def integration_limit(self, t: float) -> float:
        return self.tail_length


class SineSource(TemporalSourceBase):
    """g0(tau) = a exp(-tau) (sin(alpha tau + phi0) - sin phi0)."""

    kind: Literal["sine"] = "sine"
    alpha: float = Field(gt=0)
    phi0: float = Field(default=0.0)

    @model_validator(mode="after")
    def check_normalisable(self) -> "SineSource":
        denom = self.alpha * math.cos(self.phi0) - self.alpha ** 2 * math.sin(self.phi0)
        if abs(denom) < 1e-12:
            raise ValueError("alpha cos(phi0) - alpha^2 sin(phi0) vanishes; g0 cannot be normalised")
        return self

    @property
    def a(self) -> float:
        return (self.alpha ** 2 + 1.0) / (
            self.alpha * math.cos(self.phi0) - self.alpha ** 2 * math.sin(self.phi0)
        )

    def g0(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return self.a * np.exp(-tau) * (np.sin(self.alpha * tau + self.phi0) - math.sin(self.phi0))

    def g0_prime(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        arg = self.alpha * tau + self.phi0
        return self.a * np.exp(-tau) * (
            self.alpha * np.cos(arg) - np.sin(arg) + math.sin(self.phi0)
        )

    def poles(self, t) -> Tuple[np.ndarray, np.ndarray]:
        """
        Weights w_r(t) and offsets d_r with G0(xi, t) = sum_r w_r / (d_r + i xi).

        Returns:
            (weights, offsets): weights has shape ``np.shape(t) + (3,)``
        """
        t = np.asarray(t, dtype=float)[..., None]
        phase = self.alpha * t + self.phi0
        scale = self.a * np.exp(-t)
        weights = np.concatenate(
            [
                scale * 0.5j * np.exp(-1j * phase),
                -scale * 0.5j * np.exp(1j * phase),
                -scale * math.sin(self.phi0) * np.ones_like(phase),
            ],
            axis=-1,
        )
        offsets = np.array([1.0 + 1j * self.alpha, 1.0 - 1j * self.alpha, 1.0 + 0j])
        return weights, offsets

    def G0(self, xi, t=0.0) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        weights, offsets = self.poles(t)
        out = 0.0
        for r in range(3):
            out = out + weights[..., r] / (offsets[r] + 1j * xi)
        return np.asarray(out, dtype=complex)


class PolynomialSource(TemporalSourceBase):
    """g0(tau) = exp(-tau) sum_k P_k tau^k / k!, with P_0 = 0 and sum P_k = 1."""

    kind: Literal["polynomial"] = "polynomial"
    coefficients: List[float] = Field(..., min_length=1, description="P_1 .. P_n")

    @field_validator("coefficients")
    @classmethod
    def validate_coefficients(cls, v: List[float]) -> List[float]:
        if len(v) > MAX_POLYNOMIAL_DEGREE:
            raise ValueError(f"polynomial degree is capped at {MAX_POLYNOMIAL_DEGREE}")
        if abs(sum(v) - 1.0) > 1e-12:
            raise ValueError(f"coefficients must sum to 1 (got {sum(v)!r})")
        return v

    @property
    def degree(self) -> int:
        return len(self.coefficients)

    @property
    def full_coefficients(self) -> np.ndarray:
        """P_0 .. P_n including the vanishing constant term."""
        return np.concatenate([[0.0], np.asarray(self.coefficients, dtype=float)])

    def taylor_weights(self, t) -> np.ndarray:
        """c_j(t) = sum_{k>=j} P_k t^(k-j) / (k-j)!, shape ``np.shape(t) + (n+1,)``."""
        t = np.asarray(t, dtype=float)
        P = self.full_coefficients
        n = self.degree
        out = np.zeros(t.shape + (n + 1,))
        for j in range(n + 1):
            for k in range(j, n + 1):
                out[..., j] += P[k] * t ** (k - j) / math.factorial(k - j)
        return out

    def g0(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        P = self.full_coefficients
        poly = sum(P[k] * tau ** k / math.factorial(k) for k in range(1, self.degree + 1))
        return np.exp(-tau) * poly

    def g0_prime(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        P = self.full_coefficients
        poly = sum(
            P[k] * (tau ** (k - 1) / math.factorial(k - 1) - tau ** k / math.factorial(k))
            for k in range(1, self.degree + 1)
        )
        return np.exp(-tau) * poly

    def G0(self, xi, t=0.0) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        weights = self.taylor_weights(t)
        base = 1.0 / (1.0 + 1j * xi)
        out = 0.0
        power = base
        for j in range(self.degree + 1):
            out = out + weights[..., j] * power
            power = power * base
        return np.asarray(np.exp(-np.asarray(t, dtype=float)) * out, dtype=complex)


class TabulatedSource(TemporalSourceBase):
    """
    g0 sampled on the uniform grid tau_k = k * dtau, extended by zero beyond the
    last sample. G0 has no closed form and is computed by quadrature.
    """

    kind: Literal["tabulated"] = "tabulated"
    dtau: float = Field(gt=0)
    samples: List[float] = Field(..., min_length=4)

    _spline: interpolate.CubicSpline = PrivateAttr()

    @field_validator("samples")
    @classmethod
    def validate_samples(cls, v: List[float]) -> List[float]:
        if abs(v[0]) > 1e-12:
            raise ValueError("tabulated g0 must vanish at tau = 0")
        if abs(v[-1]) >= 1e-10:
            raise ValueError("tabulated g0 must fall below 1e-10 at the last sample")
        return v

    @model_validator(mode="after")
    def check_normalised(self) -> "TabulatedSource":
        total = integrate.simpson(np.asarray(self.samples), dx=self.dtau)
        if abs(total - 1.0) > 1e-4:
            raise ValueError(f"tabulated g0 must integrate to 1 (got {total:.8f})")
        return self

    def model_post_init(self, __context) -> None:
        grid = self.dtau * np.arange(len(self.samples))
        self._spline = interpolate.CubicSpline(grid, np.asarray(self.samples, dtype=float))
        logger.debug(f"Tabulated g0: {len(self.samples)} samples up to tau={self.tau_max:g}")

    @property
    def tau_max(self) -> float:
        return self.dtau * (len(self.samples) - 1)

    @property
    def has_closed_form(self) -> bool:
        return False

    def integration_limit(self, t: float) -> float:
        return max(self.tau_max - t, 0.0)

    def g0(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return np.where(tau <= self.tau_max, self._spline(np.clip(tau, 0.0, self.tau_max)), 0.0)

    def g0_prime(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return np.where(
            tau <= self.tau_max, self._spline(np.clip(tau, 0.0, self.tau_max), 1), 0.0
        )

    def G0(self, xi, t=0.0) -> np.ndarray:
        return G0_quadrature(self, xi, t)


TemporalSource = Annotated[
    Union[SineSource, PolynomialSource, TabulatedSource], Field(discriminator="kind")
]


def G0_quadrature(src: TemporalSourceBase, xi, t=0.0) -> np.ndarray:
    """
    G0(xi, t) = integral_0^inf exp(-i xi tau) g0(tau + t) dtau by adaptive
    Gauss-Kronrod quadrature (QAWO for the oscillatory weight).
    """
    xi_arr, t_arr = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(t, dtype=float))
    out = np.empty(xi_arr.shape, dtype=complex)
    for idx in np.ndindex(xi_arr.shape):
        x, s = float(xi_arr[idx]), float(t_arr[idx])
        upper = src.integration_limit(s)
        if upper <= 0.0:
            out[idx] = 0.0
            continue

        def shifted(tau, s=s):
            return float(src.g0(tau + s))

        if x == 0.0:
            re = integrate.quad(shifted, 0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
            im = 0.0
        else:
            re = integrate.quad(
                shifted, 0.0, upper, weight="cos", wvar=x, epsabs=1e-14, epsrel=1e-12, limit=400
            )[0]
            im = -integrate.quad(
                shifted, 0.0, upper, weight="sin", wvar=x, epsabs=1e-14, epsrel=1e-12, limit=400
            )[0]
        out[idx] = complex(re, im)
    return out


def eval_temporal(src: TemporalSourceBase, tau) -> np.ndarray:
    """g0(tau); the physical source is g(tau) = lambda g0(lambda tau)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("g0 is defined for tau >= 0 only")
    return src.g0(tau)


def eval_G0(src: TemporalSourceBase, xi, t=0.0) -> np.ndarray:
    """G0(xi, t) = integral_0^inf exp(-i xi tau) g0(tau + t) dtau."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("G0 is defined for t >= 0 only")
    return src.G0(xi, t)


def _im_over_xi_at_zero(src: TemporalSourceBase) -> float:
    """Even extrapolation of Im G0(z, 0) / z to z = 0 from z = e and 2e."""
    e = F2_EXTRAPOLATION_STEP
    h1 = float(np.imag(src.G0(e, 0.0))) / e
    h2 = float(np.imag(src.G0(2.0 * e, 0.0))) / (2.0 * e)
    return (4.0 * h1 - h2) / 3.0


def eval_symbols(src: TemporalSourceBase, xi, t=0.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    The even symbols f1(xi) = Re G0(sqrt xi, 0), f2(xi) = xi^(-1/2) Im G0(sqrt xi, 0)
    and f3(xi, t) = Re G0(sqrt xi, t).
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("symbols are defined for xi >= 0 only")
    root = np.sqrt(xi)
    g_zero = src.G0(root, 0.0)
    f1 = np.real(g_zero)
    small = root < F2_EXTRAPOLATION_STEP
    with np.errstate(divide="ignore", invalid="ignore"):
        f2 = np.where(small, 0.0, np.imag(g_zero) / np.where(small, 1.0, root))
    if np.any(small):
        f2 = np.where(small, _im_over_xi_at_zero(src), f2)
    f3 = np.real(src.G0(root, t))
    return f1, f2, f3


def im_G0_over_xi(src: TemporalSourceBase, xi) -> np.ndarray:
    """Im G0(xi, 0) / xi with the removable singularity at xi = 0 filled in."""
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < F2_EXTRAPOLATION_STEP
    safe = np.where(small, 1.0, xi)
    out = np.imag(src.G0(safe, 0.0)) / safe
    if np.any(small):
        out = np.where(small, _im_over_xi_at_zero(src), out)
    return out
