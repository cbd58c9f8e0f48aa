"""
raywave - Front Chart
Local coordinates near regular front points: the arcs psi_j(x, t) of the
front whose normal passes through x, and the phases S_j(x, t).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import interpolate, optimize

from src.core.utils.logging import get_logger_with_context
from src.core.waves.rays import FrontSet

logger = get_logger_with_context(module="chart")

NEWTON_MAX_ITER = 30
ORTHOGONALITY_TOL = 1.0e-9


@dataclass
class Branch:
    psi: float
    S: float
    morse: int
    x_psi_norm: float
    c_at_X: float
    residual: float = 0.0


@dataclass
class ChartPoint:
    x: np.ndarray
    t: float
    branches: List[Branch] = field(default_factory=list)
    focal_branches: int = 0
    dropped: int = 0

    @property
    def masked(self) -> bool:
        """Every branch through this point is focal."""
        return not self.branches and self.focal_branches > 0


class FrontSlice:
    """Periodic cubic interpolants of one time slice of a FrontSet."""

    def __init__(self, front: FrontSet, time_index: int):
        self.front = front
        self.index = time_index
        self.t = float(front.times[time_index])
        psi_ext = np.append(front.psi, 2 * math.pi)

        def periodic(values):
            return interpolate.CubicSpline(
                psi_ext, np.concatenate([values, values[:1]], axis=0), bc_type="periodic", axis=0
            )

        self.X_grid = front.X[time_index]
        self.X_psi_grid = front.X_psi[time_index]
        self._X = periodic(self.X_grid)
        self._X_psi = periodic(self.X_psi_grid)
        self._P = periodic(front.P[time_index])
        self._c = periodic(front.velocity.c(self.X_grid))

    def X(self, psi):
        return self._X(np.mod(psi, 2 * math.pi))

    def X_psi(self, psi):
        return self._X_psi(np.mod(psi, 2 * math.pi))

    def X_psipsi(self, psi):
        return self._X_psi(np.mod(psi, 2 * math.pi), 1)

    def P(self, psi):
        return self._P(np.mod(psi, 2 * math.pi))

    def c(self, psi):
        return self._c(np.mod(psi, 2 * math.pi))

    def morse(self, psi: float) -> int:
        n = self.front.psi.size
        k = int(round((psi % (2 * math.pi)) / (2 * math.pi) * n)) % n
        return int(self.front.morse[self.index, k])

    def threshold(self, relative: Optional[float] = None) -> float:
        rel = self.front.focal_threshold if relative is None else relative
        return rel * self.front.c0 * self.t


def _periodic_runs(mask: np.ndarray) -> List[np.ndarray]:
    """Maximal runs of True on a periodic index set."""
    n = mask.size
    if mask.all():
        return [np.arange(n)]
    start = int(np.argmin(mask))
    order = (start + np.arange(n)) % n
    runs, current = [], []
    for k in order:
        if mask[k]:
            current.append(k)
        elif current:
            runs.append(np.array(current))
            current = []
    if current:
        runs.append(np.array(current))
    return runs


def _refine(sl: FrontSlice, x: np.ndarray, a: float, b: float, guess: float):
    """Newton on the orthogonality residual inside [a, b], bisection-type fallback."""

    def residual(psi):
        return float(np.dot(x - sl.X(psi), sl.X_psi(psi)))

    psi = guess
    for _ in range(NEWTON_MAX_ITER):
        X, Xp = sl.X(psi), sl.X_psi(psi)
        d = x - X
        r = float(np.dot(d, Xp))
        scale = float(np.linalg.norm(Xp) * np.linalg.norm(d))
        if abs(r) <= ORTHOGONALITY_TOL * scale or r == 0.0:
            return psi
        deriv = -float(np.dot(Xp, Xp)) + float(np.dot(d, sl.X_psipsi(psi)))
        if deriv == 0.0:
            break
        nxt = psi - r / deriv
        if not (a <= nxt <= b):
            break
        if abs(nxt - psi) < 1e-15:
            return nxt
        psi = nxt
    try:
        return optimize.brentq(residual, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except ValueError:
        return None


def locate_branches(front: FrontSet, x, t: float, band: float,
                    front_slice: Optional[FrontSlice] = None) -> ChartPoint:
    """
    Every front arc within ``band`` of x whose normal passes through x.

    Grid angles with |x - X| < band are grouped into periodic arcs; sign
    changes of <x - X, X_psi> inside each arc (plus one neighbour either side)
    bracket the roots, which Newton then refines. Candidates that fail to
    converge are dropped and counted.
    """
    if band <= 0:
        raise ValueError("band must be positive")
    x = np.asarray(x, dtype=float)
    sl = front_slice if front_slice is not None else FrontSlice(front, front.time_index(t))
    point = ChartPoint(x=x, t=sl.t)
    d = x - sl.X_grid
    dist = np.linalg.norm(d, axis=1)
    inside = dist < band
    if not inside.any():
        return point

    n = front.psi.size
    h = 2 * math.pi / n
    r = np.sum(d * sl.X_psi_grid, axis=1)
    roots: List[float] = []
    for run in _periodic_runs(inside):
        if run.size == n:
            indices = np.append(run, run[0])
        else:
            indices = np.concatenate([[(run[0] - 1) % n], run, [(run[-1] + 1) % n]])
        for i, j in zip(indices[:-1], indices[1:]):
            a = front.psi[i]
            b = a + h
            if r[i] == 0.0:
                roots.append(a)
                continue
            if r[i] * r[j] >= 0:
                continue
            guess = a + h * r[i] / (r[i] - r[j])
            root = _refine(sl, x, a, b, guess)
            if root is None:
                point.dropped += 1
                logger.debug(f"Dropped candidate near psi={a:.6f} at x={x.tolist()}")
                continue
            roots.append(root % (2 * math.pi))

    roots.sort()
    unique: List[float] = []
    for root in roots:
        if not unique or abs(root - unique[-1]) > 1e-10:
            unique.append(root)
    if len(unique) > 1 and abs(unique[0] + 2 * math.pi - unique[-1]) <= 1e-10:
        unique.pop()

    threshold = sl.threshold()
    for psi in unique:
        X = sl.X(psi)
        offset = x - X
        if np.linalg.norm(offset) >= band:
            continue
        Xp = sl.X_psi(psi)
        norm = float(np.linalg.norm(Xp))
        if norm <= threshold:
            point.focal_branches += 1
            continue
        point.branches.append(Branch(
            psi=float(psi),
            S=float(np.dot(sl.P(psi), offset)),
            morse=sl.morse(psi),
            x_psi_norm=norm,
            c_at_X=float(sl.c(psi)),
            residual=float(np.dot(offset, Xp)),
        ))
    return point


def is_regular(front: FrontSet, psi: float, t: float, threshold: Optional[float] = None) -> bool:
    """True iff |X_psi(t, psi)| > threshold * c0 * t."""
    k = front.time_index(t)
    rel = front.focal_threshold if threshold is None else threshold
    j = front.psi_index(psi)
    if j is not None:
        norm = float(np.linalg.norm(front.X_psi[k, j]))
    else:
        norm = float(np.linalg.norm(FrontSlice(front, k).X_psi(psi)))
    return norm > rel * front.c0 * float(front.times[k])


def default_band(mu: float, omega: float, b_max: float, factor: float = 12.0) -> float:
    """Half-width of the neighbourhood of the front where the profile is evaluated."""
    return factor * mu * omega * b_max
