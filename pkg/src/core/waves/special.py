"""
raywave - Special Functions
Complex erfc, E1, Si/Ci and the I0 kernel used by the closed-form profiles
and transient moments.

Switching radii:
    erfc_complex        scipy erfc for |w| <= 30, overflow error beyond
    erfcx_complex       Faddeeva wofz(i w) everywhere
    expint_E1           scipy exp1 (power series near the origin and along the
                        negative axis, continued fraction elsewhere)
    scaled_expint_E1    exp(w) E1(w) as a direct product for |w| <= 40, the
                        asymptotic series sum (-1)^k k! / w^(k+1) truncated at
                        its smallest term for |w| > 40
    auxiliary_fg        Si/Ci form for |z| < 30 and |Im z| <= 4, E1 form for
                        |z| < 30 and |Im z| > 4, asymptotic series for |z| >= 30
"""

import math
from typing import Tuple

import numpy as np
from scipy import special

from src.core.waves.errors import SpecialFunctionDomainError, SpecialFunctionOverflowError

ERFC_RADIUS = 30.0
E1_SERIES_RADIUS = 40.0
AUX_SERIES_RADIUS = 30.0
AUX_STRIP_HALF_WIDTH = 4.0
_SQRT_PI = math.sqrt(math.pi)


def erfc_complex(w) -> np.ndarray:
    """erfc(w) for complex w with |w| <= 30."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) > ERFC_RADIUS):
        raise SpecialFunctionOverflowError(
            f"erfc requested at |w|={np.max(np.abs(w)):.3g}, beyond the radius {ERFC_RADIUS:g}"
        )
    out = special.erfc(w)
    if not np.all(np.isfinite(out)):
        raise SpecialFunctionOverflowError("erfc overflowed inside its accuracy radius")
    return out


def erfcx_complex(w) -> np.ndarray:
    """Scaled complementary error function exp(w^2) erfc(w) = wofz(i w)."""
    return special.wofz(1j * np.asarray(w, dtype=complex))


def expint_E1(z) -> np.ndarray:
    """Principal-branch E1(z), cut along the negative real axis."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SpecialFunctionDomainError("E1 is singular at z = 0")
    return special.exp1(z)


def _scaled_e1_series(w: np.ndarray) -> np.ndarray:
    term = 1.0 / w
    total = term.copy()
    active = np.ones(w.shape, dtype=bool)
    for k in range(1, 200):
        nxt = term * (-k / w)
        active &= np.abs(nxt) < np.abs(term)
        if not active.any():
            break
        total = np.where(active, total + nxt, total)
        term = np.where(active, nxt, term)
    return total


def scaled_expint_E1(w) -> np.ndarray:
    """exp(w) E1(w) without intermediate overflow."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise SpecialFunctionDomainError("E1 is singular at w = 0")
    out = np.empty(w.shape, dtype=complex)
    near = np.abs(w) <= E1_SERIES_RADIUS
    if near.any():
        out[near] = np.exp(w[near]) * special.exp1(w[near])
    if (~near).any():
        out[~near] = _scaled_e1_series(w[~near])
    return out


def ray_laplace_pole(q, z) -> np.ndarray:
    """
    integral_0^inf exp(-s z) / (s + q) ds for Re z > 0 and q off the ray -s.

    Equals exp(qz) times E1 taken along the ray qz + tau z, tau >= 0; when that
    ray crosses the negative real axis the principal value is shifted by
    2 pi i (crossing downwards) or -2 pi i (crossing upwards).
    """
    q, z = np.broadcast_arrays(np.asarray(q, dtype=complex), np.asarray(z, dtype=complex))
    w0 = q * z
    out = scaled_expint_E1(w0)
    x0, y0 = w0.real, w0.imag
    dx, dy = z.real, z.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(dy != 0, -y0 / np.where(dy != 0, dy, 1.0), -1.0)
    crosses = (tau > 0) & (x0 + tau * dx < 0)
    starts_on_cut = (y0 == 0) & (x0 < 0) & (dy < 0)
    shift = np.where(crosses, np.sign(y0), 0.0) + np.where(starts_on_cut, 1.0, 0.0)
    if np.any(shift != 0):
        out = out + shift * 2j * math.pi * np.exp(w0)
    return out


def sin_cos_integrals(z) -> Tuple[np.ndarray, np.ndarray]:
    """(Si(z), Ci(z)) on the principal branch."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SpecialFunctionDomainError("Ci is singular at z = 0")
    si, ci = special.sici(z)
    return si, ci


def _aux_series(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    inv2 = 1.0 / (z * z)
    f_term = 1.0 / z
    g_term = inv2.copy()
    f_sum, g_sum = f_term.copy(), g_term.copy()
    f_active = np.ones(z.shape, dtype=bool)
    g_active = np.ones(z.shape, dtype=bool)
    for k in range(1, 100):
        f_next = -f_term * (2 * k - 1) * (2 * k) * inv2
        g_next = -g_term * (2 * k) * (2 * k + 1) * inv2
        f_active &= np.abs(f_next) < np.abs(f_term)
        g_active &= np.abs(g_next) < np.abs(g_term)
        if not (f_active.any() or g_active.any()):
            break
        f_sum = np.where(f_active, f_sum + f_next, f_sum)
        g_sum = np.where(g_active, g_sum + g_next, g_sum)
        f_term = np.where(f_active, f_next, f_term)
        g_term = np.where(g_active, g_next, g_term)
    return f_sum, g_sum


def auxiliary_fg(z) -> Tuple[np.ndarray, np.ndarray]:
    """
    f(z) = integral_0^inf exp(-zs) / (1 + s^2) ds = Ci(z) sin z + (pi/2 - Si(z)) cos z
    g(z) = integral_0^inf s exp(-zs) / (1 + s^2) ds = -Ci(z) cos z + (pi/2 - Si(z)) sin z
    for Re z > 0.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise SpecialFunctionDomainError("auxiliary functions need Re z > 0")
    f = np.empty(z.shape, dtype=complex)
    g = np.empty(z.shape, dtype=complex)

    far = np.abs(z) >= AUX_SERIES_RADIUS
    strip = ~far & (np.abs(z.imag) <= AUX_STRIP_HALF_WIDTH)
    middle = ~far & ~strip

    if strip.any():
        zs = z[strip]
        si, ci = special.sici(zs)
        rest = 0.5 * math.pi - si
        f[strip] = ci * np.sin(zs) + rest * np.cos(zs)
        g[strip] = -ci * np.cos(zs) + rest * np.sin(zs)
    if middle.any():
        zm = z[middle]
        lower = scaled_expint_E1(-1j * zm)
        upper = scaled_expint_E1(1j * zm)
        f[middle] = (lower - upper) / 2j
        g[middle] = 0.5 * (lower + upper)
    if far.any():
        f[far], g[far] = _aux_series(z[far])
    return f, g


def _check_I0_arguments(C1: np.ndarray, C2: np.ndarray) -> None:
    if np.any(C1.real <= 0):
        raise SpecialFunctionDomainError("I0 needs Re C1 > 0")
    if np.any((C2.real == 0) & (C2.imag > 0)):
        raise SpecialFunctionDomainError("I0 is undefined for C2 on the positive imaginary axis")


def I0_kernel(C1, C2) -> np.ndarray:
    """
    I0(C1, C2) = integral_0^inf sqrt(rho) exp(-C1 rho) / (C2 - i rho) drho.

    With b = i C2 this is i [sqrt(pi/C1) - pi sqrt(b) erfcx(sqrt(b) sqrt(C1))],
    principal roots throughout. For arg C2 in (-pi, pi/2) it coincides with
    i sqrt(pi)/sqrt(C1) + exp(-i pi/4) pi sqrt(C2) exp(i C1 C2) erfc(exp(i pi/4) sqrt(C1) sqrt(C2)).
    """
    C1, C2 = np.broadcast_arrays(np.asarray(C1, dtype=complex), np.asarray(C2, dtype=complex))
    _check_I0_arguments(C1, C2)
    root_b = np.sqrt(1j * C2)
    root_c1 = np.sqrt(C1)
    return 1j * (_SQRT_PI / root_c1 - math.pi * root_b * erfcx_complex(root_b * root_c1))


def I0_moments(C1, C2, m_max: int) -> np.ndarray:
    """
    J_m = integral_0^inf sqrt(s) exp(-C1 s) (C2 - i s)^(-m) ds for m = 1 .. m_max.

    Uses the companion family L_m with weight s^(-1/2):
        J_m = i/(m-1) (L_{m-1}/2 - C1 J_{m-1}),   L_m = (i J_m + L_{m-1}) / C2.

    Returns:
        Array of shape ``broadcast(C1, C2).shape + (m_max,)``
    """
    C1, C2 = np.broadcast_arrays(np.asarray(C1, dtype=complex), np.asarray(C2, dtype=complex))
    _check_I0_arguments(C1, C2)
    if np.any(C2 == 0):
        raise SpecialFunctionDomainError("moment recurrence needs C2 != 0")
    root_b = np.sqrt(1j * C2)
    root_c1 = np.sqrt(C1)
    out = np.empty(C1.shape + (m_max,), dtype=complex)
    L_prev = _SQRT_PI / root_c1
    L_cur = 1j * math.pi / root_b * erfcx_complex(root_b * root_c1)
    J_cur = -1j * (C2 * L_cur - L_prev)
    out[..., 0] = J_cur
    for m in range(2, m_max + 1):
        J_cur = 1j / (m - 1) * (0.5 * L_cur - C1 * J_cur)
        L_cur = (1j * J_cur + L_cur) / C2
        out[..., m - 1] = J_cur
    return out
