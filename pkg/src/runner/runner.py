"""
raywave - Run Orchestration
Executes one configured run: asymptotic fields, the FD oracle, a comparison
report, profile tables or a ray dump, all written into one output directory.
"""

import math
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from src.core.utils.config import get_settings
from src.core.utils.logging import attach_run_log, detach_run_log, get_logger_with_context
from src.core.waves.chart import default_band
from src.core.waves.fields import (
    FieldGrid,
    GridSpec,
    propagating_field,
    total_field,
    transient_field,
)
from src.core.waves.oracle import FDConfig, FDRun, run_fd
from src.core.waves.profile import ProfileFn, instantaneous_profile, wave_profile
from src.core.waves.rays import FrontSet, build_front
from src.core.waves.sources import ScaleParams, eval_temporal
from src.infrastructure.storage.fieldio import FieldStore
from src.runner.report import (
    RunReport,
    SnapshotStats,
    center_fraction,
    decay_slope,
    front_band_mask,
    mask_coverage,
    relative_l2,
    resample,
)
from src.runner.run_config import LoadedRun, resolved_dump

logger = get_logger_with_context(module="runner")

DEFAULT_OUTPUT_DIR = "raywave-out"
LAMBDA_ASSUMPTION = "a caption constant written as Lambda is read as lambda"


def output_directory(cli_out: Optional[str], run: LoadedRun) -> Path:
    """--out, then RAYWAVE_OUTPUT_DIR, then the config key, then the default."""
    for candidate in (cli_out, get_settings().output_dir, run.config.output_dir):
        if candidate:
            return Path(candidate)
    return Path(DEFAULT_OUTPUT_DIR)


class Runner:
    """One run of one mode. Every file goes through a single FieldStore."""

    def __init__(self, run: LoadedRun, output_dir: Path, threads: int = 1):
        self.run = run
        self.cfg = run.config
        self.scales: ScaleParams = run.scales
        self.velocity = run.velocity
        self.spatial = self.cfg.source.spatial
        self.temporal = self.cfg.source.temporal
        self.threads = threads
        self.store = FieldStore(output_dir, text_export=self.cfg.output.text_export)

    # ----------------------------------------
    # Shared pieces
    # ----------------------------------------

    def _plain_closed_form(self) -> bool:
        return self.temporal.has_closed_form and not self.spatial.has_derivative

    def _transient_mode(self) -> str:
        mode = self.cfg.transient.mode
        if mode == "auto":
            return "closed_form" if self._plain_closed_form() else "quadrature"
        return mode

    def _profile_fn(self, omega: float, requested: str) -> ProfileFn:
        mode = requested
        if mode == "auto":
            mode = "closed_form" if self._plain_closed_form() else "quadrature"
        return ProfileFn(self.temporal, self.spatial, omega, mode)

    def _band(self) -> float:
        return default_band(self.scales.mu, self.scales.omega, self.spatial.b_max,
                            self.cfg.propagating.band_factor)

    def _front(self) -> FrontSet:
        rays = self.cfg.rays
        return build_front(self.velocity, rays.psi_count, self.cfg.times, tol=rays.tol,
                           threads=self.threads, focal_threshold=rays.focal_threshold,
                           method=rays.method, step=rays.step)

    def _asymptotic_fields(self, front: FrontSet, t: float) -> Dict[str, FieldGrid]:
        grid: GridSpec = self.cfg.grid
        pf = self._profile_fn(self.scales.omega, self.cfg.propagating.profile_mode)
        trans = transient_field(self.scales, self.spatial, self.temporal, grid, t,
                                psi_count=self.cfg.transient.psi_count,
                                mode=self._transient_mode(), threads=self.threads,
                                check_real=self.cfg.transient.check_real)
        prop = propagating_field(front, pf, self.scales, grid, t, self._band(), threads=self.threads)
        return {"transient": trans, "propagating": prop, "total": total_field(trans, prop)}

    def _report(self) -> RunReport:
        report = RunReport(mode=self.cfg.mode)
        report.parameters = {
            "lambda": self.scales.lam, "mu": self.scales.mu, "c0": self.scales.c0,
            "nu": self.scales.nu, "omega": self.scales.omega, "band": self._band(),
        }
        if self.temporal.has_closed_form:
            report.expected_decay_slope = -self.scales.nu * self.scales.lam
        if abs(self.scales.lam - 1.0) < 1e-12:
            report.assumptions.append(LAMBDA_ASSUMPTION)
        return report

    def _save_report(self, report: RunReport) -> None:
        self.store.save_text("report.txt", report.to_text())
        self.store.save_json("report.json", report.to_dict())

    # ----------------------------------------
    # Modes
    # ----------------------------------------

    def asymptotic(self) -> RunReport:
        front = self._front()
        report = self._report()
        center_radius = 10.0 * self.scales.mu * self.spatial.b_max
        report.parameters["center_radius"] = center_radius
        totals: List[FieldGrid] = []
        norms: List[float] = []
        for t in self.cfg.times:
            fields = self._asymptotic_fields(front, t)
            for grid in fields.values():
                self.store.save_field(grid)
            totals.append(fields["total"])
            norms.append(fields["transient"].l2_norm())
            report.snapshots.append(SnapshotStats(
                t=t, transient_norm=norms[-1], mask_coverage=mask_coverage(fields["total"]),
            ))
        peak = max(float(np.max(np.abs(g.unmasked()))) for g in totals)
        for snap, grid in zip(report.snapshots, totals):
            snap.peak = float(np.max(np.abs(grid.unmasked())))
            snap.center_fraction = center_fraction(grid, center_radius, peak)
        if self.temporal.has_closed_form:
            report.transient_decay_slope = decay_slope(self.cfg.times, norms)
        self._save_report(report)
        return report

    def _fd_config(self) -> FDConfig:
        spec = self.cfg.oracle
        grid: GridSpec = self.cfg.grid
        reach = max(abs(grid.x_min), abs(grid.x_max), abs(grid.y_min), abs(grid.y_max))
        t_end = self.cfg.times[-1]
        radius = spec.comparison_radius if spec.comparison_radius is not None else math.sqrt(2) * reach
        c_max = self.velocity.c_max(reach + t_end * self.velocity.c0 * 2)
        half_width = spec.half_width
        if half_width is None:
            half_width = max(c_max * t_end + 0.5 * radius, reach) + 4 * spec.h
            half_width = spec.h * math.ceil(half_width / spec.h)
        dt = spec.dt if spec.dt is not None else spec.cfl * spec.h / c_max
        return FDConfig(half_width=half_width, h=spec.h, dt=dt, t_end=t_end, velocity=self.velocity,
                        scales=self.scales, spatial=self.spatial, temporal=self.temporal,
                        comparison_radius=radius)

    def _oracle_run(self) -> FDRun:
        fd = run_fd(self._fd_config(), self.cfg.times)
        self.store.save_table("energy.tsv", ["t", "energy"],
                              zip(fd.energy_times.tolist(), fd.energy_history.tolist()))
        return fd

    def oracle(self) -> None:
        fd = self._oracle_run()
        for grid in fd.snapshots:
            self.store.save_field(grid)

    def compare(self) -> RunReport:
        front = self._front()
        fd = self._oracle_run()
        report = self._report()
        band = self._band()
        norms: List[float] = []
        for t, oracle_grid in zip(self.cfg.times, fd.snapshots):
            fields = self._asymptotic_fields(front, t)
            total = fields["total"]
            points = total.points()
            reference = resample(oracle_grid, points)
            on_grid = FieldGrid.from_spec(self.cfg.grid, reference, t, "oracle")
            for grid in (*fields.values(), on_grid):
                self.store.save_field(grid)
            valid = ~total.mask
            in_band = front_band_mask(front, t, points, band) & valid
            norms.append(fields["transient"].l2_norm())
            report.snapshots.append(SnapshotStats(
                t=t,
                band_relative_l2=relative_l2(total.values, reference, in_band),
                global_relative_l2=relative_l2(total.values, reference, valid),
                transient_norm=norms[-1],
                peak=float(np.max(np.abs(total.unmasked()))),
                mask_coverage=mask_coverage(total),
            ))
        if self.temporal.has_closed_form:
            report.transient_decay_slope = decay_slope(self.cfg.times, norms)
        self._save_report(report)
        logger.info(f"Banded relative L2 (worst) = {report.headline}")
        return report

    def profile(self) -> None:
        spec = self.cfg.profile
        z = np.asarray(spec.z.values())
        psi = np.asarray(spec.psi)
        lambdas = [self.scales.lam] + [lam for lam in spec.lambda_sweep if lam != self.scales.lam]
        rows = []
        for lam in lambdas:
            omega = self.scales.c0 / (lam * self.scales.mu)
            pf = self._profile_fn(omega, spec.mode)
            for angle in psi:
                values = wave_profile(pf, z, angle)
                for zz, f in zip(z.tolist(), values.tolist()):
                    rows.append([lam, omega, float(angle), zz, f.real, f.imag])
        self.store.save_table("profile.tsv", ["lambda", "omega", "psi", "z", "re_F", "im_F"], rows)

        if spec.include_instantaneous and not self.spatial.has_derivative:
            inst_rows = []
            for angle in psi:
                values = instantaneous_profile(self.spatial, z, angle)
                for zz, f in zip(z.tolist(), values.tolist()):
                    inst_rows.append([float(angle), zz, f.real, f.imag])
            self.store.save_table("profile_instantaneous.tsv", ["psi", "z", "re_F", "im_F"], inst_rows)

        tau = z[z >= 0]
        if tau.size:
            self.store.save_table("g0.tsv", ["tau", "g0"],
                                  zip(tau.tolist(), np.real(eval_temporal(self.temporal, tau)).tolist()))

    def rays(self) -> None:
        front = self._front()
        norm = np.linalg.norm(front.X_psi, axis=-1)
        rows = []
        for k, t in enumerate(front.times.tolist()):
            for j, angle in enumerate(front.psi.tolist()):
                rows.append([
                    t, angle, *front.X[k, j].tolist(), *front.P[k, j].tolist(),
                    *front.X_psi[k, j].tolist(), float(norm[k, j]),
                    int(front.morse[k, j]), int(front.focal[k, j]),
                ])
        self.store.save_table(
            "rays.tsv",
            ["t", "psi", "X1", "X2", "P1", "P2", "Xpsi1", "Xpsi2", "abs_Xpsi", "morse", "focal"],
            rows,
        )
        caustic_rows = [[j, float(front.psi[j]), float(tau)]
                        for j, taus in enumerate(front.caustics) for tau in np.asarray(taus).tolist()]
        self.store.save_table("caustics.tsv", ["ray", "psi", "tau"], caustic_rows)
        self.store.save_json("rays_summary.json", {
            "psi_count": int(front.psi.size),
            "times": front.times.tolist(),
            "max_morse": int(front.morse.max()) if front.morse.size else 0,
            "focal_samples": int(np.sum(front.focal[front.times > 0])),
            "max_spectral_discrepancy": float(np.max(front.spectral_discrepancy)),
        })

    def execute(self) -> Optional[RunReport]:
        self.store.save_yaml("config.resolved.yaml", resolved_dump(self.run))
        handler = attach_run_log(self.store.output_dir)
        try:
            logger.info(f"Mode {self.cfg.mode}: omega={self.scales.omega:.6g}, "
                        f"velocity {self.velocity.describe()}, {self.threads} threads")
            return getattr(self, self.cfg.mode)()
        finally:
            detach_run_log(handler)


def run(run_config: LoadedRun, output_dir: Path, threads: int = 1) -> Optional[RunReport]:
    """Execute the configured mode and write its outputs into ``output_dir``."""
    return Runner(run_config, output_dir, threads).execute()
