"""Tests for the finite-difference reference solver."""

import math

import numpy as np
import pytest

from src.core.waves.errors import CFLViolationError, GridMismatchError
from src.core.waves.fields import FieldGrid
from src.core.waves.oracle import FDConfig, energy, run_fd, solve_fd
from src.core.waves.sources import ScaleParams, SpatialSource


def _bump(points):
    return np.exp(-2.0 * np.sum(points ** 2, axis=-1))


class TestFDConfig:
    def test_refuses_unstable_step(self, constant_velocity):
        with pytest.raises(CFLViolationError) as exc_info:
            FDConfig(half_width=3.0, h=0.1, dt=0.06, t_end=1.0, velocity=constant_velocity)
        assert "reference_oracle" in str(exc_info.value)

    def test_refuses_small_domain(self, constant_velocity):
        with pytest.raises(ValueError):
            FDConfig(half_width=1.0, h=0.1, dt=0.05, t_end=2.0, velocity=constant_velocity)

    def test_comparison_radius_counts(self, constant_velocity):
        FDConfig(half_width=2.0, h=0.1, dt=0.05, t_end=2.0, velocity=constant_velocity)
        with pytest.raises(ValueError):
            FDConfig(half_width=2.0, h=0.1, dt=0.05, t_end=2.0, velocity=constant_velocity,
                     comparison_radius=0.5)

    def test_forced_run_needs_all_parts(self, constant_velocity, spatial_source, sine_source):
        with pytest.raises(ValueError):
            FDConfig(half_width=3.0, h=0.1, dt=0.05, t_end=1.0, velocity=constant_velocity,
                     spatial=spatial_source, temporal=sine_source)

    def test_grid_axis(self, constant_velocity):
        cfg = FDConfig(half_width=3.0, h=0.1, dt=0.05, t_end=1.0, velocity=constant_velocity)
        assert cfg.n == 61
        assert cfg.axis[0] == pytest.approx(-3.0)
        assert cfg.axis[-1] == pytest.approx(3.0)


class TestRunFD:
    def test_zero_data_stays_zero(self, constant_velocity):
        cfg = FDConfig(half_width=2.0, h=0.1, dt=0.05, t_end=1.0, velocity=constant_velocity)
        run = run_fd(cfg, [0.0, 0.5, 1.0])
        assert len(run.snapshots) == 3
        for snap in run.snapshots:
            assert snap.component == "oracle"
            assert not snap.values.any()
        assert not run.energy_history.any()

    def test_energy_conserved_without_forcing(self, offset_lens):
        cfg = FDConfig(half_width=6.0, h=0.1, dt=0.05, t_end=5.0, velocity=offset_lens,
                       initial_displacement=_bump)
        run = run_fd(cfg, [])
        history = run.energy_history
        assert history[0] > 0
        assert np.max(np.abs(history - history[0])) / history[0] < 1e-10

    def test_energy_quadruples_with_amplitude(self, constant_velocity, scales, sine_source):
        def final_energy(amplitude):
            spatial = SpatialSource(amplitude=amplitude, b1=1.0, b2=2.0)
            cfg = FDConfig(half_width=2.0, h=0.05, dt=0.02, t_end=1.0, velocity=constant_velocity,
                           scales=scales, spatial=spatial, temporal=sine_source)
            return run_fd(cfg, []).energy_history[-1]

        assert final_energy(2.0) == pytest.approx(4.0 * final_energy(1.0), rel=1e-10)

    def test_forced_energy_spike_grows_like_inverse_omega_squared(self, constant_velocity, spatial_source,
                                                                  sine_source):
        # V = (1 + |y|^2)^(-3/2) with b = (1, 2): |V|^2 = pi, |grad V|^2 = 15 pi / 16
        settled = 15 * math.pi / 32
        # 1/2 pi max(g0)^2 for g0 = 2.5 exp(-tau) sin(2 tau)
        spike_scale = 0.5 * math.pi * (2.5 * math.exp(-0.5 * math.atan(2.0)) * math.sin(math.atan(2.0))) ** 2

        def spike(lam):
            scales = ScaleParams(lam=lam, mu=0.1, c0=1.0)
            cfg = FDConfig(half_width=1.0, h=0.01, dt=0.05 / lam, t_end=20.0 / lam,
                           velocity=constant_velocity, scales=scales, spatial=spatial_source,
                           temporal=sine_source)
            run = run_fd(cfg, [])
            tau = run.energy_times * lam
            history = run.energy_history
            late = history[tau >= 15.0]
            assert np.ptp(late) / late[-1] < 1e-3
            assert late[-1] == pytest.approx(settled, rel=0.08)
            assert 0.3 <= tau[np.argmax(history)] <= 1.0
            return scales.omega, history.max() - late[-1]

        omega, excess = spike(100.0)
        half_omega, half_excess = spike(200.0)
        assert half_omega == pytest.approx(omega / 2)
        assert excess * omega ** 2 == pytest.approx(spike_scale, rel=0.15)
        assert half_excess * half_omega ** 2 == pytest.approx(spike_scale, rel=0.15)
        assert 3.3 <= half_excess / excess <= 4.7

    def test_second_order_convergence(self, offset_lens):
        solutions = []
        for h in (0.1, 0.05, 0.025):
            cfg = FDConfig(half_width=3.0, h=h, dt=h / 4, t_end=1.0, velocity=offset_lens,
                           initial_displacement=_bump)
            solutions.append(solve_fd(cfg, [1.0])[0].values)
        coarse, mid, fine = solutions
        e1 = np.linalg.norm(coarse - mid[::2, ::2])
        e2 = np.linalg.norm(mid[::2, ::2] - fine[::4, ::4])
        assert math.log2(e1 / e2) == pytest.approx(2.0, abs=0.2)

    def test_snapshot_between_steps(self, constant_velocity):
        cfg = FDConfig(half_width=2.0, h=0.1, dt=0.04, t_end=1.0, velocity=constant_velocity,
                       initial_displacement=_bump)
        run = run_fd(cfg, [0.48, 0.50, 0.52])
        a, b, c = (s.values for s in run.snapshots)
        np.testing.assert_allclose(b, 0.5 * (a + c), atol=1e-12)
        assert [s.t for s in run.snapshots] == [0.48, 0.50, 0.52]

    def test_rejects_late_snapshot(self, constant_velocity):
        cfg = FDConfig(half_width=2.0, h=0.1, dt=0.05, t_end=1.0, velocity=constant_velocity)
        with pytest.raises(ValueError):
            run_fd(cfg, [1.5])


class TestEnergy:
    def test_continuous_energy_tracks_history(self, constant_velocity):
        cfg = FDConfig(half_width=3.0, h=0.05, dt=0.005, t_end=1.0, velocity=constant_velocity,
                       initial_displacement=_bump)
        run = run_fd(cfg, [0.5])
        value = energy(run.snapshots[0], run.rates[0], constant_velocity)
        assert value == pytest.approx(run.energy_history[0], rel=0.05)

    def test_plane_gradient(self, constant_velocity):
        xs = np.linspace(0.0, 1.0, 11)
        values = np.tile(xs, (11, 1))
        eta = FieldGrid((0.0, 0.0), (0.1, 0.1), 11, 11, values, 0.0, "oracle")
        still = FieldGrid((0.0, 0.0), (0.1, 0.1), 11, 11, np.zeros((11, 11)), 0.0, "oracle")
        # 110 x-faces with unit slope, each weighted by h^2
        assert energy(eta, still, constant_velocity) == pytest.approx(0.5 * 110 * 0.01)

    def test_mismatched_grids(self, constant_velocity):
        a = FieldGrid((0.0, 0.0), (0.1, 0.1), 3, 3, np.zeros((3, 3)), 0.0, "oracle")
        b = FieldGrid((0.0, 0.0), (0.2, 0.2), 3, 3, np.zeros((3, 3)), 0.0, "oracle")
        with pytest.raises(GridMismatchError):
            energy(a, b, constant_velocity)
