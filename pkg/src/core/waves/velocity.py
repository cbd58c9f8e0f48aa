"""
raywave - Velocity Fields
Smooth positive c(x) with gradient and Hessian, constant outside a disk of
radius r_stab.
"""

import math
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from scipy import interpolate

from src.core.utils.logging import get_logger_with_context

logger = get_logger_with_context(module="velocity")

# exp(-GAUSSIAN_CUTOFF^2) is below double-precision resolution
GAUSSIAN_CUTOFF = 6.1


class VelocityField:
    """Base class; points are stored along the last axis of ``x``."""

    r_stab: float = 0.0

    def c(self, x) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def c0(self) -> float:
        return float(self.c(np.zeros(2)))

    def c_max(self, half_width: float) -> float:
        """Upper bound of c on the square [-half_width, half_width]^2."""
        axis = np.linspace(-half_width, half_width, 201)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        return float(np.max(self.c(np.stack([xx, yy], axis=-1))))

    def describe(self) -> str:
        return type(self).__name__


class ConstantVelocity(VelocityField):
    """c(x) = c everywhere."""

    def __init__(self, c: float):
        if c <= 0:
            raise ValueError("velocity must be positive")
        self.value = float(c)

    def c(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self.value)

    def grad(self, x) -> np.ndarray:
        return np.zeros(np.shape(x), dtype=float)

    def hessian(self, x) -> np.ndarray:
        return np.zeros(np.shape(x) + (2,), dtype=float)

    def c_max(self, half_width: float) -> float:
        return self.value

    def describe(self) -> str:
        return f"constant c={self.value:g}"


class GaussianBumpVelocity(VelocityField):
    """
    c(x) = background + sum_k a_k exp(-|x - x_k|^2 / w_k^2).

    Negative amplitudes give dips (focusing lenses). Each bump is cut at
    GAUSSIAN_CUTOFF widths, where it is below double precision anyway.
    """

    def __init__(self, background: float, bumps: Sequence[Tuple[Sequence[float], float, float]]):
        if background <= 0:
            raise ValueError("background velocity must be positive")
        self.background = float(background)
        self.centers = np.array([b[0] for b in bumps], dtype=float).reshape(-1, 2)
        self.amplitudes = np.array([b[1] for b in bumps], dtype=float)
        self.widths = np.array([b[2] for b in bumps], dtype=float)
        if np.any(self.widths <= 0):
            raise ValueError("bump widths must be positive")
        floor = self.background + np.sum(np.minimum(self.amplitudes, 0.0))
        if floor <= 0:
            raise ValueError(f"dips can drive c to {floor:g}; velocity must stay positive")
        self.c_min = floor
        if len(self.amplitudes):
            self.r_stab = float(
                np.max(np.linalg.norm(self.centers, axis=1) + GAUSSIAN_CUTOFF * self.widths)
            )

    def _terms(self, x: np.ndarray):
        d = x[..., None, :] - self.centers
        r2 = np.sum(d * d, axis=-1) / self.widths ** 2
        e = np.where(r2 < GAUSSIAN_CUTOFF ** 2, self.amplitudes * np.exp(-r2), 0.0)
        return d, e

    def c(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _, e = self._terms(x)
        return self.background + np.sum(e, axis=-1)

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d, e = self._terms(x)
        return np.sum((-2.0 * e / self.widths ** 2)[..., None] * d, axis=-2)

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d, e = self._terms(x)
        w2 = self.widths ** 2
        outer = d[..., :, None] * d[..., None, :]
        eye = np.eye(2)
        terms = e[..., None, None] * (
            4.0 * outer / (w2 ** 2)[..., None, None] - 2.0 * eye / w2[..., None, None]
        )
        return np.sum(terms, axis=-3)

    def c_max(self, half_width: float) -> float:
        return self.background + float(np.sum(np.maximum(self.amplitudes, 0.0)))

    def describe(self) -> str:
        return f"gaussian background={self.background:g} bumps={len(self.amplitudes)}"


class TabulatedVelocity(VelocityField):
    """
    Bicubic interpolation of c sampled on a regular grid. Outside the table
    the value at the nearest rim point is used and the gradient vanishes.
    """

    def __init__(self, x_min: float, x_max: float, y_min: float, y_max: float, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or min(values.shape) < 4:
            raise ValueError("velocity table needs at least 4x4 samples")
        if np.any(values <= 0):
            raise ValueError("tabulated velocity must be positive")
        ny, nx = values.shape
        self.xs = np.linspace(x_min, x_max, nx)
        self.ys = np.linspace(y_min, y_max, ny)
        self.values = values
        self._spline = interpolate.RectBivariateSpline(self.xs, self.ys, values.T, kx=3, ky=3)
        self.r_stab = float(math.hypot(max(abs(x_min), abs(x_max)), max(abs(y_min), abs(y_max))))
        rim = np.concatenate([values[0], values[-1], values[:, 0], values[:, -1]])
        if np.ptp(rim) > 1e-6 * np.max(rim):
            logger.warning("Velocity table rim is not constant; far field is clamped to the rim")

    def _clip(self, x: np.ndarray):
        px = np.clip(x[..., 0], self.xs[0], self.xs[-1])
        py = np.clip(x[..., 1], self.ys[0], self.ys[-1])
        inside = (px == x[..., 0]) & (py == x[..., 1])
        return px, py, inside

    def c(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        px, py, _ = self._clip(x)
        return self._spline.ev(px, py)

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        px, py, inside = self._clip(x)
        gx = np.where(inside, self._spline.ev(px, py, dx=1), 0.0)
        gy = np.where(inside, self._spline.ev(px, py, dy=1), 0.0)
        return np.stack([gx, gy], axis=-1)

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        px, py, inside = self._clip(x)
        hxx = np.where(inside, self._spline.ev(px, py, dx=2), 0.0)
        hxy = np.where(inside, self._spline.ev(px, py, dx=1, dy=1), 0.0)
        hyy = np.where(inside, self._spline.ev(px, py, dy=2), 0.0)
        row0 = np.stack([hxx, hxy], axis=-1)
        row1 = np.stack([hxy, hyy], axis=-1)
        return np.stack([row0, row1], axis=-2)

    def c_max(self, half_width: float) -> float:
        return float(np.max(self.values))

    def describe(self) -> str:
        return f"tabulated {self.values.shape[1]}x{self.values.shape[0]}"


def load_velocity_table(path: Path) -> TabulatedVelocity:
    """
    Read a velocity table: first line ``x_min x_max y_min y_max nx ny``, then
    ny*nx reals in row-major order (rows run along y).
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError(f"{path}: header must be 'x_min x_max y_min y_max nx ny'")
        x_min, x_max, y_min, y_max = (float(v) for v in header[:4])
        nx, ny = int(header[4]), int(header[5])
        data = np.loadtxt(fh, dtype=float).ravel()
    if data.size != nx * ny:
        raise ValueError(f"{path}: expected {nx * ny} values, found {data.size}")
    logger.info(f"Loaded velocity table {path.name} ({nx}x{ny})")
    return TabulatedVelocity(x_min, x_max, y_min, y_max, data.reshape(ny, nx))


def gaussian_lens(depth: float = 0.3, center: List[float] = (0.0, 0.0), width: float = 1.0,
                  background: float = 1.0) -> GaussianBumpVelocity:
    """c(x) = background - depth exp(-|x - center|^2 / width^2)."""
    return GaussianBumpVelocity(background, [(center, -depth, width)])
