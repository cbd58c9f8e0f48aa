"""
raywave - Field Assembly
Equivalent sources, propagating / transient / total fields on regular grids.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.utils.logging import get_logger_with_context
from src.core.waves.chart import FrontSlice, locate_branches
from src.core.waves.errors import GridMismatchError, RaywaveError, UnsupportedModeError
from src.core.waves.profile import ProfileFn, wave_profile
from src.core.waves.rays import FrontSet
from src.core.waves.sources import (
    ScaleParams,
    SpatialSource,
    TemporalSourceBase,
    im_G0_over_xi,
)
from src.core.waves.transient import (
    imag_moment,
    imag_moment_quadrature,
    real_moment,
    real_moment_quadrature,
)

logger = get_logger_with_context(module="fields")

Component = Literal["transient", "propagating", "total", "U1", "U2", "oracle"]
COMPONENTS = ("transient", "propagating", "total", "U1", "U2", "oracle")
MASK_SENTINEL = -1.0e30
REALNESS_TOLERANCE = 1.0e-10
POINT_CHUNK = 256


class GridSpec(BaseModel):
    """Regular grid x = x_min + i*hx (i < nx), y = y_min + j*hy (j < ny)."""

    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = Field(ge=2)
    ny: int = Field(ge=2)

    @model_validator(mode="after")
    def check_extent(self) -> "GridSpec":
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("grid extent must have x_max > x_min and y_max > y_min")
        return self

    @property
    def origin(self) -> Tuple[float, float]:
        return (self.x_min, self.y_min)

    @property
    def spacing(self) -> Tuple[float, float]:
        return ((self.x_max - self.x_min) / (self.nx - 1), (self.y_max - self.y_min) / (self.ny - 1))

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.linspace(self.x_min, self.x_max, self.nx), np.linspace(self.y_min, self.y_max, self.ny)

    def points(self) -> np.ndarray:
        """Cell coordinates, shape (ny, nx, 2)."""
        xs, ys = self.axes()
        xx, yy = np.meshgrid(xs, ys)
        return np.stack([xx, yy], axis=-1)


@dataclass
class FieldGrid:
    """Real field values on a regular grid; values[j, i] sits at (x_i, y_j)."""

    origin: Tuple[float, float]
    spacing: Tuple[float, float]
    nx: int
    ny: int
    values: np.ndarray
    t: float
    component: str
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.ny, self.nx):
            raise ValueError(f"values shape {self.values.shape} does not match ({self.ny}, {self.nx})")
        if self.component not in COMPONENTS:
            raise ValueError(f"unknown component {self.component!r}")
        if self.mask is None:
            self.mask = np.zeros((self.ny, self.nx), dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        self.values = np.where(self.mask, MASK_SENTINEL, self.values)

    @classmethod
    def from_spec(cls, spec: GridSpec, values, t: float, component: str,
                  mask: Optional[np.ndarray] = None) -> "FieldGrid":
        return cls(spec.origin, spec.spacing, spec.nx, spec.ny, values, t, component, mask)

    def same_geometry(self, other: "FieldGrid") -> bool:
        return (
            self.nx == other.nx and self.ny == other.ny
            and np.allclose(self.origin, other.origin, rtol=0, atol=1e-12)
            and np.allclose(self.spacing, other.spacing, rtol=1e-12, atol=0)
        )

    def points(self) -> np.ndarray:
        xs = self.origin[0] + self.spacing[0] * np.arange(self.nx)
        ys = self.origin[1] + self.spacing[1] * np.arange(self.ny)
        xx, yy = np.meshgrid(xs, ys)
        return np.stack([xx, yy], axis=-1)

    def unmasked(self) -> np.ndarray:
        """Values with masked cells set to zero."""
        return np.where(self.mask, 0.0, self.values)

    def l2_norm(self, region: Optional[np.ndarray] = None) -> float:
        weights = ~self.mask if region is None else (~self.mask & region)
        cell = self.spacing[0] * self.spacing[1]
        return float(math.sqrt(np.sum(np.where(weights, self.values, 0.0) ** 2) * cell))


def real_part(values: np.ndarray, what: str, check: bool = False) -> np.ndarray:
    """Real part; with ``check`` a relative imaginary residue above REALNESS_TOLERANCE raises."""
    if check:
        scale = max(float(np.max(np.abs(values))), 1e-300)
        residue = float(np.max(np.abs(np.imag(values)))) / scale
        if residue > REALNESS_TOLERANCE:
            raise RaywaveError(f"{what}: imaginary residue {residue:.2e}", module="field_assembler")
    return np.real(values)


def _psi_nodes(count: int) -> np.ndarray:
    if count < 8:
        raise ValueError("need at least 8 angular nodes")
    return 2 * math.pi * np.arange(count) / count


def _map_chunks(func, points: np.ndarray, threads: int) -> np.ndarray:
    flat = points.reshape(-1, 2)
    chunks = [flat[i:i + POINT_CHUNK] for i in range(0, flat.shape[0], POINT_CHUNK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(func, chunks))
    return np.concatenate(parts).reshape(points.shape[:-1])


# ============================================
# Equivalent sources
# ============================================

def equivalent_sources(scales: ScaleParams, spatial: SpatialSource, temporal: TemporalSourceBase,
                       p) -> Tuple[np.ndarray, np.ndarray]:
    """
    U1~(p) = Re G0(omega|p|, 0) V~(p),
    U2~(p) = lambda^-1 Im[G0(omega|p|, 0) / (omega|p|)] V~(p).
    """
    p = np.asarray(p, dtype=float)
    xi = scales.omega * np.linalg.norm(p, axis=-1)
    v = spatial.fourier(p)
    u1 = np.real(temporal.G0(xi, 0.0)) * v
    u2 = im_G0_over_xi(temporal, xi) / scales.lam * v
    return u1, u2


def _polar_sum(scales, spatial, psi_nodes, points, moment, power_of_rho: int = 0) -> np.ndarray:
    """
    Periodic trapezoid over psi of moment(z(psi)) with
    z = (beta(psi) - i <n(psi), x> / mu) / omega.
    """
    omega = scales.omega
    beta = spatial.beta(psi_nodes)
    n = np.stack([np.cos(psi_nodes), np.sin(psi_nodes)], axis=-1)
    proj = points @ n.T / scales.mu
    z = (beta[None, :] - 1j * proj) / omega
    if np.any(z.real <= 0):
        raise RaywaveError("transient argument left the half-plane Re z > 0", module="field_assembler")
    values = moment(z)
    if spatial.has_derivative:
        values = values * spatial.derivative_factor(1.0 / omega, psi_nodes)[None, :]
    return np.sum(values, axis=1) * (2 * math.pi / psi_nodes.size)


def transient_values(scales: ScaleParams, spatial: SpatialSource, temporal: TemporalSourceBase,
                     points: np.ndarray, t: float, psi_count: int = 512,
                     mode: str = "closed_form", threads: int = 1, check_real: bool = False) -> np.ndarray:
    """eta_trans at arbitrary points (last axis = coordinates)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    points = np.asarray(points, dtype=float)
    psi = _psi_nodes(psi_count)
    T = scales.lam * t
    order = sum(spatial.deriv)
    if mode == "closed_form" and (spatial.has_derivative or not temporal.has_closed_form):
        raise UnsupportedModeError("closed-form transient needs a plain spatial source and a built-in temporal kind")
    if mode == "closed_form":
        def moment(z):
            return real_moment(temporal, z, T)
    elif mode == "quadrature":
        def moment(z):
            return real_moment_quadrature(temporal, z, T, power=1 + order)
    else:
        raise UnsupportedModeError(f"unknown transient mode {mode!r}")

    pref = -spatial.amplitude * spatial.b1 * spatial.b2 / (2 * math.pi * scales.omega ** 2)

    def chunk(pts):
        return _polar_sum(scales, spatial, psi, pts, moment)

    return pref * real_part(_map_chunks(chunk, points, threads), "transient field", check_real)


def transient_field(scales: ScaleParams, spatial: SpatialSource, temporal: TemporalSourceBase,
                    grid: GridSpec, t: float, psi_count: int = 512, mode: str = "closed_form",
                    threads: int = 1, check_real: bool = False) -> FieldGrid:
    """
    eta_trans(x, t) = -(2 pi)^-1 integral_0^2pi integral_0^inf rho Re G0(omega rho, lambda t)
                      V~(rho n(psi)) exp(i rho <n(psi), x> / mu) drho dpsi.
    """
    logger.info(f"Transient field at t={t:g} on {grid.nx}x{grid.ny} ({mode}, {psi_count} angles)")
    values = transient_values(scales, spatial, temporal, grid.points(), t, psi_count, mode, threads,
                              check_real)
    return FieldGrid.from_spec(grid, values, t, "transient")


def equivalent_source_fields(scales: ScaleParams, spatial: SpatialSource,
                             temporal: TemporalSourceBase, grid: GridSpec, psi_count: int = 512,
                             mode: str = "closed_form", threads: int = 1,
                             check_real: bool = False) -> Tuple[FieldGrid, FieldGrid]:
    """U1(x/mu) and U2(x/mu) by polar inversion of their Fourier transforms."""
    psi = _psi_nodes(psi_count)
    order = sum(spatial.deriv)
    if mode == "closed_form" and (spatial.has_derivative or not temporal.has_closed_form):
        raise UnsupportedModeError("closed-form equivalent sources need a plain spatial source and a built-in temporal kind")
    if mode == "closed_form":
        def first(z):
            return real_moment(temporal, z, 0.0)

        def second(z):
            return imag_moment(temporal, z)
    else:
        def first(z):
            return real_moment_quadrature(temporal, z, 0.0, power=1 + order)

        def second(z):
            return imag_moment_quadrature(temporal, z, power=order)

    pref = spatial.amplitude * spatial.b1 * spatial.b2 / (2 * math.pi * scales.omega ** 2)
    points = grid.points()
    u1 = pref * real_part(
        _map_chunks(lambda p: _polar_sum(scales, spatial, psi, p, first), points, threads), "U1", check_real
    )
    u2 = pref / scales.lam * real_part(
        _map_chunks(lambda p: _polar_sum(scales, spatial, psi, p, second), points, threads), "U2", check_real
    )
    return FieldGrid.from_spec(grid, u1, 0.0, "U1"), FieldGrid.from_spec(grid, u2, 0.0, "U2")


# ============================================
# Propagating component
# ============================================

def propagating_field(front: FrontSet, pf: ProfileFn, scales: ScaleParams, grid: GridSpec,
                      t: float, band: float, threads: int = 1) -> FieldGrid:
    """
    eta_prop(x, t) = sqrt(mu) Re sum_j exp(-i pi m_j / 2) |X_psi|^-1/2 sqrt(c0 / c(X)) F(S_j / mu, psi_j)
    over the regular branches within ``band`` of the front. Cells whose only
    branches are focal are masked.
    """
    if t <= 0:
        raise ValueError("the propagating field needs t > 0")
    sl = FrontSlice(front, front.time_index(t))
    points = grid.points()
    mu = scales.mu

    def row(j: int):
        amps, zs, angles, masked, dropped = [], [], [], np.zeros(grid.nx, dtype=bool), 0
        cells = []
        for i in range(grid.nx):
            cp = locate_branches(front, points[j, i], t, band, front_slice=sl)
            dropped += cp.dropped
            masked[i] = cp.masked
            for br in cp.branches:
                cells.append(i)
                amps.append(
                    np.exp(-0.5j * math.pi * br.morse)
                    * math.sqrt(front.c0 / br.c_at_X) / math.sqrt(br.x_psi_norm)
                )
                zs.append(br.S / mu)
                angles.append(br.psi)
        values = np.zeros(grid.nx)
        if cells:
            profile = wave_profile(pf, np.array(zs), np.array(angles))
            contrib = math.sqrt(mu) * np.real(np.array(amps) * profile)
            np.add.at(values, np.array(cells), contrib)
        return values, masked, dropped

    logger.info(f"Propagating field at t={t:g} on {grid.nx}x{grid.ny}, band={band:.4g}")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(row, range(grid.ny)))
    values = np.array([r[0] for r in rows])
    mask = np.array([r[1] for r in rows])
    dropped = sum(r[2] for r in rows)
    if dropped:
        logger.warning(f"{dropped} chart candidates dropped after failed refinement")
    return FieldGrid.from_spec(grid, values, t, "propagating", mask)


def total_field(first: FieldGrid, second: FieldGrid) -> FieldGrid:
    """Pointwise sum with the union of the masks."""
    if not first.same_geometry(second):
        raise GridMismatchError("cannot add fields on different grids")
    if abs(first.t - second.t) > 1e-12 * max(1.0, abs(first.t)):
        raise GridMismatchError(f"cannot add fields at t={first.t} and t={second.t}")
    mask = first.mask | second.mask
    values = np.where(mask, 0.0, first.unmasked() + second.unmasked())
    return replace(first, values=values, mask=mask, component="total")
