"""
raywave - Ray Tracer
Hamiltonian rays for H(x, p) = |p| c(x) launched from the origin in every
direction psi, their variational (tangent) system, fronts, focal points and
Morse indices.

State layout per ray: [x1, x2, p1, p2, a1, a2, b1, b2] with a = dX/dpsi and
b = dP/dpsi.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import integrate, interpolate

from src.core.utils.logging import get_logger_with_context
from src.core.waves.errors import RayIntegrationError
from src.core.waves.velocity import VelocityField

logger = get_logger_with_context(module="rays")

STATE_SIZE = 8
MOMENTUM_FLOOR = 1.0e-6
TANGENTIAL_ZERO = 1.0e-9
CHUNK_SIZE = 64
SPECTRAL_CHECK_TOLERANCE = 1.0e-4


def launch_state(psi) -> np.ndarray:
    """Initial data X = 0, P = n(psi), X_psi = 0, P_psi = n'(psi); shape (N, 8)."""
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    state = np.zeros((psi.size, STATE_SIZE))
    state[:, 2] = np.cos(psi)
    state[:, 3] = np.sin(psi)
    state[:, 6] = -np.sin(psi)
    state[:, 7] = np.cos(psi)
    return state


def hamiltonian_rhs(vel: VelocityField) -> Callable[[float, np.ndarray], np.ndarray]:
    """Right-hand side of the ray + variational system for a flat batch of rays."""

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        s = y.reshape(-1, STATE_SIZE)
        x, p, a, b = s[:, 0:2], s[:, 2:4], s[:, 4:6], s[:, 6:8]
        pn = np.linalg.norm(p, axis=1)
        c = vel.c(x)
        g = vel.grad(x)
        h = vel.hessian(x)
        u = p / pn[:, None]
        ga = np.sum(g * a, axis=1)
        ub = np.sum(u * b, axis=1)

        out = np.empty_like(s)
        out[:, 0:2] = c[:, None] * u
        out[:, 2:4] = -pn[:, None] * g
        out[:, 4:6] = ga[:, None] * u + (c / pn)[:, None] * (b - ub[:, None] * u)
        out[:, 6:8] = -ub[:, None] * g - pn[:, None] * np.einsum("nij,nj->ni", h, a)
        return out.ravel()

    return rhs


def hamiltonian(vel: VelocityField, states: np.ndarray) -> np.ndarray:
    """|p| c(x) for states stored along the last axis."""
    return np.linalg.norm(states[..., 2:4], axis=-1) * vel.c(states[..., 0:2])


class Trajectory:
    """
    A batch of rays with dense output.

    Attributes:
        psi: launch angles, shape (N,)
        nodes: integrator time nodes
        node_states: states at the nodes, shape (len(nodes), N, 8)
    """

    def __init__(self, psi: np.ndarray, nodes: np.ndarray, node_states: np.ndarray,
                 dense: Callable[[np.ndarray], np.ndarray]):
        self.psi = psi
        self.nodes = nodes
        self.node_states = node_states
        self._dense = dense

    @property
    def t_end(self) -> float:
        return float(self.nodes[-1])

    def states(self, tau) -> np.ndarray:
        """States at the times ``tau``; shape (len(tau), N, 8)."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        flat = np.asarray(self._dense(tau))
        return flat.T.reshape(tau.size, self.psi.size, STATE_SIZE)

    def hamiltonian_drift(self, vel: VelocityField) -> float:
        h = hamiltonian(vel, self.node_states)
        return float(np.max(np.abs(h - h[0]) / h[0]))


def _fixed_step_rk4(rhs, y0: np.ndarray, t0: float, t1: float, step: float):
    """Classical RK4 with a uniform step that lands exactly on t1."""
    n = max(1, int(math.ceil(abs(t1 - t0) / step - 1e-12)))
    h = (t1 - t0) / n
    ts = t0 + h * np.arange(n + 1)
    ys = np.empty((n + 1, y0.size))
    ys[0] = y0
    w = y0.copy()
    for j in range(n):
        t = ts[j]
        k1 = h * rhs(t, w)
        k2 = h * rhs(t + h / 2, w + k1 / 2)
        k3 = h * rhs(t + h / 2, w + k2 / 2)
        k4 = h * rhs(t + h, w + k3)
        w = w + (k1 + 2 * k2 + 2 * k3 + k4) / 6
        ys[j + 1] = w
    derivs = np.array([rhs(t, y) for t, y in zip(ts, ys)])
    if h < 0:
        ts, ys, derivs = ts[::-1], ys[::-1], derivs[::-1]
    spline = interpolate.CubicHermiteSpline(ts, ys, derivs, axis=0)
    return ts, ys, lambda tau: spline(tau).T


def integrate_state(vel: VelocityField, initial: np.ndarray, t_span, tol: float,
                    method: str = "adaptive", step: Optional[float] = None,
                    psi: Optional[np.ndarray] = None) -> Trajectory:
    """
    Integrate a batch of ray states over ``t_span`` (forward or backward).

    Args:
        vel: velocity field
        initial: states, shape (N, 8)
        t_span: (t_start, t_stop)
        tol: bound on the relative Hamiltonian drift
        method: "adaptive" (RK45, dense output) or "fixed" (classical RK4)
        step: step size for the fixed method

    Raises:
        RayIntegrationError: step-size underflow, |p| collapse or drift above tol
    """
    initial = np.atleast_2d(np.asarray(initial, dtype=float))
    count = initial.shape[0]
    psi = np.full(count, np.nan) if psi is None else np.asarray(psi, dtype=float)
    rhs = hamiltonian_rhs(vel)
    t0, t1 = float(t_span[0]), float(t_span[1])

    if t1 == t0:
        nodes = np.array([t0])
        node_states = initial[None, :, :]
        flat = initial.ravel()
        return Trajectory(psi, nodes, node_states,
                          lambda tau: np.repeat(flat[:, None], np.size(tau), axis=1))

    if method == "fixed":
        if step is None or step <= 0:
            raise ValueError("fixed-step integration needs a positive step")
        ts, ys, dense = _fixed_step_rk4(rhs, initial.ravel(), t0, t1, step)
        trajectory = Trajectory(psi, ts, ys.reshape(ts.size, count, STATE_SIZE), dense)
        _check_momentum(trajectory)
        return trajectory
    if method != "adaptive":
        raise ValueError(f"unknown integration method {method!r}")

    def momentum_event(t, y):
        return float(np.min(np.linalg.norm(y.reshape(-1, STATE_SIZE)[:, 2:4], axis=1))) - MOMENTUM_FLOOR

    momentum_event.terminal = True

    rtol = max(0.1 * tol, 1e-13)
    for attempt in range(2):
        sol = integrate.solve_ivp(
            rhs, (t0, t1), initial.ravel(), method="RK45", rtol=rtol, atol=0.01 * rtol,
            dense_output=True, events=momentum_event,
        )
        if sol.status == -1:
            raise RayIntegrationError(f"integration failed: {sol.message}", tau=float(sol.t[-1]))
        if sol.status == 1:
            raise RayIntegrationError("|p| fell below the momentum floor",
                                      tau=float(sol.t_events[0][0]))
        trajectory = Trajectory(psi, sol.t, sol.y.T.reshape(sol.t.size, count, STATE_SIZE), sol.sol)
        drift = trajectory.hamiltonian_drift(vel)
        if drift <= tol:
            return trajectory
        logger.warning(f"Hamiltonian drift {drift:.2e} above {tol:.2e}; tightening tolerance")
        rtol = max(rtol * 0.01, 1e-13)
    raise RayIntegrationError(f"Hamiltonian drift {drift:.2e} exceeds tolerance {tol:.2e}",
                              tau=float(sol.t[-1]))


def _check_momentum(trajectory: Trajectory) -> None:
    pn = np.linalg.norm(trajectory.node_states[..., 2:4], axis=-1)
    bad = np.argwhere(pn < MOMENTUM_FLOOR)
    if bad.size:
        raise RayIntegrationError("|p| fell below the momentum floor",
                                  tau=float(trajectory.nodes[bad[0, 0]]))


def integrate_ray(vel: VelocityField, psi, t_end: float, tol: float = 1e-9,
                  method: str = "adaptive", step: Optional[float] = None) -> Trajectory:
    """Ray (or batch of rays) launched from the origin in direction(s) ``psi``."""
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    return integrate_state(vel, launch_state(psi), (0.0, t_end), tol, method, step, psi)


# ============================================
# Focal points and Morse index
# ============================================

def orientation_scalar(vel: VelocityField, states: np.ndarray) -> np.ndarray:
    """j = det[X_psi, dX/dt] / |dX/dt|; equals +-|X_psi| up to orientation."""
    p = states[..., 2:4]
    a = states[..., 4:6]
    u = p / np.linalg.norm(p, axis=-1, keepdims=True)
    return a[..., 0] * u[..., 1] - a[..., 1] * u[..., 0]


def caustic_times(tau: np.ndarray, j: np.ndarray, c0: float) -> List[np.ndarray]:
    """
    Zeros of j(tau) per ray from samples on tau > 0.

    Sign changes are located by linear interpolation; touching zeros (a local
    minimum of |j| below TANGENTIAL_ZERO * c0 * tau without sign change) are
    located by a quadratic fit through the three samples around the minimum.

    Args:
        tau: sample times, shape (K,), all positive and increasing
        j: orientation scalar, shape (K, N)
    """
    out = []
    for n in range(j.shape[1]):
        col = j[:, n]
        found = []
        for k in range(len(tau) - 1):
            if col[k] == 0.0 and k > 0:
                found.append(tau[k])
            elif col[k] * col[k + 1] < 0:
                frac = col[k] / (col[k] - col[k + 1])
                found.append(tau[k] + frac * (tau[k + 1] - tau[k]))
        # A double zero between samples has no sign change and is reported once,
        # by this fit; one that lands on a sample is reported once above.
        mag = np.abs(col)
        for k in range(1, len(tau) - 1):
            if not (mag[k] <= mag[k - 1] and mag[k] <= mag[k + 1]):
                continue
            if col[k - 1] * col[k] <= 0 or col[k] * col[k + 1] <= 0:
                continue
            coeffs = np.polyfit(tau[k - 1:k + 2] - tau[k], col[k - 1:k + 2], 2)
            if coeffs[0] == 0:
                continue
            s = -coeffs[1] / (2 * coeffs[0])
            vertex = np.polyval(coeffs, s)
            if abs(vertex) <= TANGENTIAL_ZERO * c0 * tau[k] or vertex * col[k] <= 0:
                found.append(tau[k] + s)
        out.append(np.array(sorted(found)))
    return out


def _fine_times(trajectory: Trajectory, t_end: float) -> np.ndarray:
    uniform = np.linspace(0.0, t_end, max(513, int(200 * t_end) + 1))
    merged = np.union1d(uniform, trajectory.nodes[trajectory.nodes <= t_end])
    return merged[merged > 0]


# ============================================
# Fronts
# ============================================

@dataclass
class FrontSet:
    """Ray data sampled on (times x psi grid)."""

    times: np.ndarray
    psi: np.ndarray
    X: np.ndarray
    P: np.ndarray
    X_psi: np.ndarray
    P_psi: np.ndarray
    morse: np.ndarray
    focal: np.ndarray
    caustics: List[np.ndarray]
    c0: float
    focal_threshold: float
    velocity: VelocityField = field(repr=False)
    tol: float = 1e-9
    spectral_discrepancy: np.ndarray = field(default=None, repr=False)

    def time_index(self, t: float) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-12 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not one of the front times")
        return idx

    def psi_index(self, psi: float) -> Optional[int]:
        step = 2 * math.pi / self.psi.size
        k = (psi % (2 * math.pi)) / step
        nearest = int(round(k)) % self.psi.size
        return nearest if abs(k - round(k)) < 1e-9 else None


def spectral_psi_derivative(X: np.ndarray) -> np.ndarray:
    """d/dpsi of samples on a uniform periodic psi grid (axis -2)."""
    n = X.shape[-2]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    spectrum = np.fft.fft(X, axis=-2)
    return np.real(np.fft.ifft(1j * k[:, None] * spectrum, axis=-2))


def _integrate_chunk(vel, psi_chunk, times, t_end, tol, method, step, c0):
    trajectory = integrate_ray(vel, psi_chunk, t_end, tol, method, step)
    sampled = trajectory.states(times)
    fine = _fine_times(trajectory, t_end)
    j = orientation_scalar(vel, trajectory.states(fine))
    return sampled, caustic_times(fine, j, c0)


def build_front(vel: VelocityField, psi_count: int, times: Sequence[float], tol: float = 1e-9,
                threads: int = 1, focal_threshold: float = 1e-3, method: str = "adaptive",
                step: Optional[float] = None) -> FrontSet:
    """
    Integrate psi_count rays on the uniform angle grid and sample them at ``times``.

    X_psi comes from the variational system; a spectral derivative across the
    psi grid is computed alongside as a consistency check.
    """
    if psi_count < 16:
        raise ValueError("psi_count must be at least 16")
    if psi_count & (psi_count - 1):
        logger.warning(f"psi_count={psi_count} is not a power of two")
    times = np.asarray(sorted(times), dtype=float)
    if times.size == 0 or times[0] < 0:
        raise ValueError("times must be a nonempty list of nonnegative values")
    psi = 2 * math.pi * np.arange(psi_count) / psi_count
    t_end = float(times[-1])
    c0 = vel.c0
    chunks = [psi[i:i + CHUNK_SIZE] for i in range(0, psi_count, CHUNK_SIZE)]
    logger.info(f"Tracing {psi_count} rays to t={t_end:g} ({len(chunks)} chunks, {threads} threads)")

    def work(chunk):
        return _integrate_chunk(vel, chunk, times, t_end, tol, method, step, c0)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(work, chunks))

    sampled = np.concatenate([r[0] for r in results], axis=1)
    caustics = [c for r in results for c in r[1]]
    X, P = sampled[..., 0:2], sampled[..., 2:4]
    X_psi, P_psi = sampled[..., 4:6], sampled[..., 6:8]
    morse = np.array([[int(np.sum(c <= t)) for c in caustics] for t in times], dtype=int)
    norm = np.linalg.norm(X_psi, axis=-1)
    focal = norm <= focal_threshold * c0 * times[:, None]
    focal |= (times[:, None] == 0)

    spectral = spectral_psi_derivative(X)
    scale = np.maximum(np.max(norm, axis=1, keepdims=True), 1e-300)
    discrepancy = np.where(focal, 0.0, np.linalg.norm(spectral - X_psi, axis=-1) / scale)
    worst = float(np.max(discrepancy)) if discrepancy.size else 0.0
    if worst > SPECTRAL_CHECK_TOLERANCE:
        logger.warning(f"Variational and spectral X_psi differ by {worst:.2e} (relative)")

    logger.info(f"Front built: {int(np.sum(focal[times > 0]))} focal samples, "
                f"max Morse index {int(morse.max()) if morse.size else 0}")
    return FrontSet(times=times, psi=psi, X=X, P=P, X_psi=X_psi, P_psi=P_psi, morse=morse,
                    focal=focal, caustics=caustics, c0=c0, focal_threshold=focal_threshold,
                    velocity=vel, tol=tol, spectral_discrepancy=discrepancy)


def morse_index(front: FrontSet, psi: float, t: float) -> int:
    """Number of zeros of |X_psi(tau, psi)| for tau in (0, t]."""
    if t < 0 or t > front.times[-1] + 1e-12:
        raise ValueError("t outside the sampled time range")
    k = front.psi_index(psi)
    if k is not None:
        caustics = front.caustics[k]
    else:
        t_end = float(front.times[-1])
        trajectory = integrate_ray(front.velocity, [psi], t_end, front.tol)
        fine = _fine_times(trajectory, t_end)
        j = orientation_scalar(front.velocity, trajectory.states(fine))
        caustics = caustic_times(fine, j, front.c0)[0]
    return int(np.sum(caustics <= t))
