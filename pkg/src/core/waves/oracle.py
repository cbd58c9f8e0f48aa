"""
raywave - Finite-Difference Oracle
Leapfrog solution of eta_tt - div(c^2 grad eta) = lambda^2 g0'(lambda t) V(x / mu)
with zero initial data on a square with Dirichlet walls, and the discrete energy.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.core.utils.logging import get_logger_with_context
from src.core.waves.errors import CFLViolationError, GridMismatchError
from src.core.waves.fields import FieldGrid
from src.core.waves.sources import ScaleParams, SpatialSource, TemporalSourceBase
from src.core.waves.velocity import VelocityField

logger = get_logger_with_context(module="oracle")

CFL_FACTOR = 0.5


@dataclass
class FDConfig:
    """
    Square [-half_width, half_width]^2 with spacing h, leapfrog step dt up to t_end.

    Without ``temporal`` the run is homogeneous and may start from
    ``initial_displacement`` (a callable of points along the last axis).
    """

    half_width: float
    h: float
    dt: float
    t_end: float
    velocity: VelocityField
    scales: Optional[ScaleParams] = None
    spatial: Optional[SpatialSource] = None
    temporal: Optional[TemporalSourceBase] = None
    initial_displacement: Optional[Callable[[np.ndarray], np.ndarray]] = None
    comparison_radius: float = 0.0
    c_max: float = field(init=False)

    def __post_init__(self):
        if self.half_width <= 0 or self.h <= 0 or self.dt <= 0 or self.t_end < 0:
            raise ValueError("half_width, h and dt must be positive and t_end nonnegative")
        if (self.temporal is None) != (self.spatial is None) or (
            self.temporal is not None and self.scales is None
        ):
            raise ValueError("a forced run needs scales, spatial and temporal together")
        self.c_max = self.velocity.c_max(self.half_width)
        limit = CFL_FACTOR * self.h / self.c_max
        if self.dt > limit * (1 + 1e-12):
            raise CFLViolationError(
                f"dt={self.dt:g} exceeds the stability limit {limit:g} (h={self.h:g}, max c={self.c_max:g})",
                module="reference_oracle",
            )
        needed = 2 * self.c_max * self.t_end + self.comparison_radius
        if 2 * self.half_width < needed:
            raise ValueError(
                f"domain extent {2 * self.half_width:g} is below {needed:g}; "
                "wall reflections would reach the comparison region"
            )

    @property
    def n(self) -> int:
        return int(round(2 * self.half_width / self.h)) + 1

    @property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.n)

    def points(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.axis, self.axis)
        return np.stack([xx, yy], axis=-1)


@dataclass
class FDRun:
    """Snapshots plus the per-step leapfrog energy."""

    snapshots: List[FieldGrid]
    rates: List[FieldGrid]
    energy_times: np.ndarray
    energy_history: np.ndarray
    steps: int


def _face_coefficients(c2: np.ndarray):
    """c^2 averaged onto x faces (axis 1) and y faces (axis 0)."""
    return 0.5 * (c2[:, 1:] + c2[:, :-1]), 0.5 * (c2[1:, :] + c2[:-1, :])


def _apply_operator(u: np.ndarray, qx: np.ndarray, qy: np.ndarray, h: float) -> np.ndarray:
    """div(c^2 grad u) on interior cells; the walls stay at zero."""
    fx = qx * (u[:, 1:] - u[:, :-1])
    fy = qy * (u[1:, :] - u[:-1, :])
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (
        fx[1:-1, 1:] - fx[1:-1, :-1] + fy[1:, 1:-1] - fy[:-1, 1:-1]
    ) / (h * h)
    return out


def _gradient_pairing(a: np.ndarray, b: np.ndarray, qx: np.ndarray, qy: np.ndarray) -> float:
    """sum over faces of c^2 (Da)(Db); equals <-L a, b> h^2 for Dirichlet data."""
    dax, dbx = a[:, 1:] - a[:, :-1], b[:, 1:] - b[:, :-1]
    day, dby = a[1:, :] - a[:-1, :], b[1:, :] - b[:-1, :]
    return float(np.sum(qx * dax * dbx) + np.sum(qy * day * dby))


def _source_term(cfg: FDConfig, profile: np.ndarray, t: float) -> np.ndarray:
    lam = cfg.scales.lam
    return lam * lam * float(cfg.temporal.g0_prime(lam * t)) * profile


def run_fd(cfg: FDConfig, snapshot_times: Sequence[float]) -> FDRun:
    """Step to t_end, recording snapshots and the energy history."""
    times = sorted(float(t) for t in snapshot_times)
    if times and (times[0] < 0 or times[-1] > cfg.t_end + 1e-12):
        raise ValueError("snapshot times must lie in [0, t_end]")
    n, h, dt = cfg.n, cfg.h, cfg.dt
    points = cfg.points()
    c2 = cfg.velocity.c(points) ** 2
    qx, qy = _face_coefficients(c2)

    forced = cfg.temporal is not None
    profile = cfg.spatial.evaluate(points / cfg.scales.mu) if forced else None
    interior = np.zeros((n, n), dtype=bool)
    interior[1:-1, 1:-1] = True

    u_prev = np.zeros((n, n))
    if cfg.initial_displacement is not None:
        u_prev = np.where(interior, np.asarray(cfg.initial_displacement(points), dtype=float), 0.0)

    accel = _apply_operator(u_prev, qx, qy, h)
    if forced:
        accel += _source_term(cfg, profile, 0.0)
    u_curr = u_prev + 0.5 * dt * dt * accel
    u_curr[~interior] = 0.0

    steps = int(math.ceil(cfg.t_end / dt - 1e-9))
    cell = h * h
    energies = np.empty(steps)
    snapshots: List[FieldGrid] = []
    rates: List[FieldGrid] = []
    pending = list(times)
    spacing = (h, h)
    origin = (-cfg.half_width, -cfg.half_width)

    def emit(t, lower, upper, step_index):
        frac = (t - step_index * dt) / dt
        values = (1 - frac) * lower + frac * upper
        snapshots.append(FieldGrid(origin, spacing, n, n, values, t, "oracle"))
        rates.append(FieldGrid(origin, spacing, n, n, (upper - lower) / dt, t, "oracle"))

    logger.info(f"FD oracle: {n}x{n} cells, h={h:g}, dt={dt:g}, {steps} steps")
    for k in range(steps):
        # u_prev at step k, u_curr at step k + 1
        velocity = (u_curr - u_prev) / dt
        energies[k] = 0.5 * (
            float(np.sum(velocity * velocity)) * cell + _gradient_pairing(u_curr, u_prev, qx, qy)
        )
        while pending and pending[0] <= (k + 1) * dt + 1e-12 * max(1.0, cfg.t_end):
            emit(pending.pop(0), u_prev, u_curr, k)
        if k == steps - 1:
            break
        accel = _apply_operator(u_curr, qx, qy, h)
        if forced:
            accel += _source_term(cfg, profile, (k + 1) * dt)
        u_next = 2 * u_curr - u_prev + dt * dt * accel
        u_next[~interior] = 0.0
        u_prev, u_curr = u_curr, u_next
        if (k + 1) % 500 == 0:
            logger.debug(f"FD step {k + 1}/{steps}")

    for t in pending:
        emit(t, u_prev, u_curr, max(steps - 1, 0))
    energy_times = (np.arange(steps) + 0.5) * dt
    return FDRun(snapshots=snapshots, rates=rates, energy_times=energy_times,
                 energy_history=energies, steps=steps)


def solve_fd(cfg: FDConfig, snapshot_times: Sequence[float]) -> List[FieldGrid]:
    """Oracle FieldGrids at the requested times (linear in time between steps)."""
    return run_fd(cfg, snapshot_times).snapshots


def energy(eta: FieldGrid, eta_t: FieldGrid, vel: VelocityField) -> float:
    """1/2 integral (eta_t^2 + c^2 |grad eta|^2) dx, midpoint rule on cells and faces."""
    if not eta.same_geometry(eta_t):
        raise GridMismatchError("eta and eta_t live on different grids", module="reference_oracle")
    hx, hy = eta.spacing
    points = eta.points()
    kinetic = float(np.sum(eta_t.unmasked() ** 2)) * hx * hy
    u = eta.unmasked()
    mid_x = 0.5 * (points[:, 1:] + points[:, :-1])
    mid_y = 0.5 * (points[1:, :] + points[:-1, :])
    grad_x = (u[:, 1:] - u[:, :-1]) / hx
    grad_y = (u[1:, :] - u[:-1, :]) / hy
    potential = (
        float(np.sum(vel.c(mid_x) ** 2 * grad_x ** 2))
        + float(np.sum(vel.c(mid_y) ** 2 * grad_y ** 2))
    ) * hx * hy
    return 0.5 * (kinetic + potential)
