"""
raywave - Run Reports
Error norms, decay fits and mask statistics, rendered as text and as a
key/value document.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import interpolate, spatial

from src.core.waves.chart import FrontSlice
from src.core.waves.fields import FieldGrid
from src.core.waves.rays import FrontSet

DENSIFY = 8


def front_band_mask(front: FrontSet, t: float, points: np.ndarray, band: float) -> np.ndarray:
    """Cells within ``band`` of the front at time t (front densified by spline)."""
    sl = FrontSlice(front, front.time_index(t))
    psi = np.linspace(0.0, 2 * math.pi, DENSIFY * front.psi.size, endpoint=False)
    tree = spatial.cKDTree(sl.X(psi))
    dist, _ = tree.query(points.reshape(-1, 2))
    return (dist < band).reshape(points.shape[:-1])


def resample(grid: FieldGrid, points: np.ndarray) -> np.ndarray:
    """Bilinear samples of ``grid`` at ``points``; masked cells read as zero."""
    xs = grid.origin[0] + grid.spacing[0] * np.arange(grid.nx)
    ys = grid.origin[1] + grid.spacing[1] * np.arange(grid.ny)
    interp = interpolate.RegularGridInterpolator((ys, xs), grid.unmasked(), method="linear",
                                                 bounds_error=True)
    flat = points.reshape(-1, 2)
    return interp(np.stack([flat[:, 1], flat[:, 0]], axis=-1)).reshape(points.shape[:-1])


def relative_l2(candidate: np.ndarray, reference: np.ndarray, region: np.ndarray) -> float:
    """||candidate - reference|| / ||reference|| over ``region`` (cell areas cancel)."""
    ref = float(np.sqrt(np.sum(np.where(region, reference, 0.0) ** 2)))
    if ref == 0.0:
        return math.nan
    diff = float(np.sqrt(np.sum(np.where(region, candidate - reference, 0.0) ** 2)))
    return diff / ref


def decay_slope(times: Sequence[float], norms: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(norm) against t; None with fewer than two usable points."""
    t = np.asarray(times, dtype=float)
    n = np.asarray(norms, dtype=float)
    keep = n > 0
    if np.count_nonzero(keep) < 2:
        return None
    slope, _ = np.polyfit(t[keep], np.log(n[keep]), 1)
    return float(slope)


def mask_coverage(grid: FieldGrid) -> float:
    return float(np.mean(grid.mask))


def center_fraction(grid: FieldGrid, radius: float, peak: float) -> float:
    """max |value| inside |x| < radius, relative to ``peak``."""
    r = np.linalg.norm(grid.points(), axis=-1)
    inside = (r < radius) & ~grid.mask
    if peak <= 0 or not inside.any():
        return 0.0
    return float(np.max(np.abs(grid.values[inside]))) / peak


@dataclass
class SnapshotStats:
    t: float
    band_relative_l2: Optional[float] = None
    global_relative_l2: Optional[float] = None
    transient_norm: Optional[float] = None
    peak: Optional[float] = None
    center_fraction: Optional[float] = None
    mask_coverage: Optional[float] = None


@dataclass
class RunReport:
    """Everything a compare or asymptotic run summarizes."""

    mode: str
    assumptions: List[str] = field(default_factory=list)
    parameters: Dict[str, float] = field(default_factory=dict)
    snapshots: List[SnapshotStats] = field(default_factory=list)
    transient_decay_slope: Optional[float] = None
    expected_decay_slope: Optional[float] = None

    @property
    def headline(self) -> Optional[float]:
        """Worst banded relative L2 error over the snapshots."""
        values = [s.band_relative_l2 for s in self.snapshots
                  if s.band_relative_l2 is not None and not math.isnan(s.band_relative_l2)]
        return max(values) if values else None

    def to_dict(self) -> Dict:
        payload = asdict(self)
        payload["headline_band_relative_l2"] = self.headline
        return payload

    def to_text(self) -> str:
        lines = [f"raywave {self.mode} report"]
        for note in self.assumptions:
            lines.append(f"assumption: {note}")
        for key in sorted(self.parameters):
            lines.append(f"{key} = {self.parameters[key]:.10g}")
        if self.headline is not None:
            lines.append(f"banded relative L2 (worst snapshot) = {self.headline:.6e}")
        if self.transient_decay_slope is not None:
            lines.append(
                f"transient decay slope = {self.transient_decay_slope:.6g} "
                f"(expected {self.expected_decay_slope:.6g})"
            )
        lines.append("")
        columns = ["t", "band_relative_l2", "global_relative_l2", "transient_norm",
                   "peak", "center_fraction", "mask_coverage"]
        lines.append("\t".join(columns))
        for snap in self.snapshots:
            row = asdict(snap)
            lines.append("\t".join(_fmt(row[c]) for c in columns))
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if value is None:
        return "-"
    return f"{value:.6e}" if isinstance(value, float) else str(value)
