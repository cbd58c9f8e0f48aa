"""Tests for field assembly on grids."""

import math

import numpy as np
import pytest
from scipy import integrate

from src.core.waves.errors import GridMismatchError, RaywaveError, UnsupportedModeError
from src.core.waves.fields import (
    MASK_SENTINEL,
    FieldGrid,
    GridSpec,
    equivalent_source_fields,
    equivalent_sources,
    propagating_field,
    real_part,
    total_field,
    transient_field,
    transient_values,
)
from src.core.waves.profile import ProfileFn, wave_profile
from src.core.waves.rays import build_front
from src.core.waves.sources import SpatialSource

SMALL_GRID = GridSpec(x_min=-0.5, x_max=0.5, y_min=-0.4, y_max=0.4, nx=9, ny=7)


class TestFieldGrid:
    def test_mask_writes_sentinel(self):
        mask = np.zeros((2, 3), dtype=bool)
        mask[1, 2] = True
        grid = FieldGrid((0.0, 0.0), (1.0, 1.0), 3, 2, np.ones((2, 3)), 0.5, "propagating", mask)
        assert grid.values[1, 2] == MASK_SENTINEL
        assert grid.unmasked()[1, 2] == 0.0
        assert grid.l2_norm() == pytest.approx(math.sqrt(5.0))

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            FieldGrid((0.0, 0.0), (1.0, 1.0), 3, 2, np.ones((3, 2)), 0.0, "total")

    def test_rejects_nonfinite(self):
        values = np.ones((2, 2))
        values[0, 0] = np.nan
        with pytest.raises(ValueError):
            FieldGrid((0.0, 0.0), (1.0, 1.0), 2, 2, values, 0.0, "total")

    def test_rejects_unknown_component(self):
        with pytest.raises(ValueError):
            FieldGrid((0.0, 0.0), (1.0, 1.0), 2, 2, np.ones((2, 2)), 0.0, "pressure")

    def test_points_match_spec(self):
        grid = FieldGrid.from_spec(SMALL_GRID, np.zeros((7, 9)), 0.0, "transient")
        np.testing.assert_allclose(grid.points(), SMALL_GRID.points(), atol=1e-15)

    def test_spec_rejects_empty_extent(self):
        with pytest.raises(ValueError):
            GridSpec(x_min=1.0, x_max=1.0, y_min=0.0, y_max=1.0, nx=3, ny=3)


class TestTotalField:
    def test_union_of_masks(self):
        a_mask = np.array([[True, False], [False, False]])
        a = FieldGrid((0.0, 0.0), (1.0, 1.0), 2, 2, np.full((2, 2), 1.0), 1.0, "propagating", a_mask)
        b = FieldGrid((0.0, 0.0), (1.0, 1.0), 2, 2, np.full((2, 2), 2.0), 1.0, "transient")
        total = total_field(a, b)
        assert total.component == "total"
        assert total.mask[0, 0]
        assert total.values[0, 0] == MASK_SENTINEL
        np.testing.assert_allclose(total.values[~total.mask], 3.0)

    def test_geometry_mismatch(self):
        a = FieldGrid((0.0, 0.0), (1.0, 1.0), 2, 2, np.zeros((2, 2)), 1.0, "propagating")
        b = FieldGrid((0.0, 0.5), (1.0, 1.0), 2, 2, np.zeros((2, 2)), 1.0, "transient")
        with pytest.raises(GridMismatchError):
            total_field(a, b)

    def test_time_mismatch(self):
        a = FieldGrid((0.0, 0.0), (1.0, 1.0), 2, 2, np.zeros((2, 2)), 1.0, "propagating")
        b = FieldGrid((0.0, 0.0), (1.0, 1.0), 2, 2, np.zeros((2, 2)), 1.5, "transient")
        with pytest.raises(GridMismatchError):
            total_field(a, b)


class TestEquivalentSources:
    def test_at_zero_frequency(self, scales, spatial_source, polynomial_source):
        u1, u2 = equivalent_sources(scales, spatial_source, polynomial_source, np.zeros(2))
        assert complex(u1) == pytest.approx(2.0)
        # Im G0(xi)/xi -> -3 for tau^2 exp(-tau) / 2
        assert complex(u2) == pytest.approx(-3.0 * 2.0 / scales.lam, rel=1e-6)

    def test_U1_is_minus_initial_transient(self, scales, spatial_source, sine_source):
        u1, u2 = equivalent_source_fields(scales, spatial_source, sine_source, SMALL_GRID, psi_count=128)
        trans = transient_field(scales, spatial_source, sine_source, SMALL_GRID, 0.0, psi_count=128)
        np.testing.assert_allclose(u1.values, -trans.values, rtol=1e-12, atol=1e-14)
        assert u1.component == "U1" and u2.component == "U2"

    @pytest.mark.parametrize("fixture", ["sine_source", "polynomial_source"])
    def test_closed_form_matches_quadrature(self, fixture, scales, spatial_source, request):
        temporal = request.getfixturevalue(fixture)
        grid = GridSpec(x_min=-0.2, x_max=0.2, y_min=-0.1, y_max=0.1, nx=3, ny=2)
        closed = equivalent_source_fields(scales, spatial_source, temporal, grid, psi_count=64)
        quad = equivalent_source_fields(scales, spatial_source, temporal, grid, psi_count=64,
                                        mode="quadrature")
        for c, q in zip(closed, quad):
            np.testing.assert_allclose(c.values, q.values, rtol=1e-7, atol=1e-10)


class TestTransientField:
    def test_against_double_integral(self, scales, spatial_source, polynomial_source):
        x, t = np.array([0.05, 0.02]), 0.1
        T = scales.lam * t
        src = spatial_source

        def integrand(rho, psi):
            proj = (x[0] * math.cos(psi) + x[1] * math.sin(psi)) / scales.mu
            g = float(np.real(polynomial_source.G0(scales.omega * rho, T)))
            v = src.amplitude * src.b1 * src.b2 * math.exp(-rho * float(src.beta(psi)))
            return rho * g * v * math.cos(rho * proj)

        value = integrate.dblquad(integrand, 0.0, 2 * math.pi, 0.0, 40.0,
                                  epsabs=1e-12, epsrel=1e-10)[0]
        expected = -value / (2 * math.pi)
        got = transient_values(scales, src, polynomial_source, x[None, :], t, psi_count=512)
        assert float(got[0]) == pytest.approx(expected, rel=1e-7)

    @pytest.mark.parametrize("fixture", ["sine_source", "shifted_sine_source", "polynomial_source"])
    def test_closed_form_matches_quadrature(self, fixture, scales, rotated_source, request):
        temporal = request.getfixturevalue(fixture)
        grid = GridSpec(x_min=-0.2, x_max=0.2, y_min=-0.1, y_max=0.1, nx=3, ny=2)
        closed = transient_field(scales, rotated_source, temporal, grid, 0.05, psi_count=64)
        quad = transient_field(scales, rotated_source, temporal, grid, 0.05, psi_count=64,
                               mode="quadrature")
        np.testing.assert_allclose(closed.values, quad.values, rtol=1e-7, atol=1e-10)

    def test_decay_rate_sine(self, scales, spatial_source, sine_source):
        # times a half period apart in the source phase leave |eta| shaped alike
        T = 0.2 + np.arange(4) * math.pi / sine_source.alpha
        times = T / scales.lam
        norms = [
            transient_field(scales, spatial_source, sine_source, SMALL_GRID, t, psi_count=128).l2_norm()
            for t in times
        ]
        slope = np.polyfit(times, np.log(norms), 1)[0]
        assert slope == pytest.approx(-scales.lam * scales.nu, rel=1e-6)

    def test_decay_rate_polynomial(self, scales, spatial_source, polynomial_source):
        times = np.linspace(20.0, 60.0, 9) / scales.lam
        norms = [
            transient_field(scales, spatial_source, polynomial_source, SMALL_GRID, t,
                            psi_count=128).l2_norm()
            for t in times
        ]
        slope = np.polyfit(times, np.log(norms), 1)[0]
        assert slope == pytest.approx(-scales.lam, rel=0.1)

    def test_localised_near_source(self, scales, spatial_source, polynomial_source):
        grid = GridSpec(x_min=-4.0, x_max=4.0, y_min=-4.0, y_max=4.0, nx=81, ny=81)
        field = transient_field(scales, spatial_source, polynomial_source, grid, 0.1,
                                psi_count=1024, threads=4)
        radius = np.linalg.norm(grid.points(), axis=-1)
        inner = field.l2_norm(radius < 1.0)
        assert inner / field.l2_norm() > 0.99

    def test_derivative_needs_quadrature(self, scales, sine_source):
        derived = SpatialSource(b1=1.0, b2=2.0, deriv=(1, 0))
        with pytest.raises(UnsupportedModeError):
            transient_field(scales, derived, sine_source, SMALL_GRID, 0.1)

    def test_derivative_is_odd(self, scales, sine_source):
        derived = SpatialSource(b1=1.0, b2=2.0, deriv=(1, 0))
        grid = GridSpec(x_min=-0.1, x_max=0.1, y_min=0.0, y_max=0.05, nx=2, ny=2)
        field = transient_field(scales, derived, sine_source, grid, 0.05, psi_count=32,
                                mode="quadrature")
        np.testing.assert_allclose(field.values[:, 0], -field.values[:, 1], rtol=1e-8, atol=1e-12)

    def test_negative_time_rejected(self, scales, spatial_source, sine_source):
        with pytest.raises(ValueError):
            transient_values(scales, spatial_source, sine_source, np.zeros((1, 2)), -1.0)

    def test_checked_assembly_is_real(self, scales, rotated_source, shifted_sine_source):
        plain = transient_field(scales, rotated_source, shifted_sine_source, SMALL_GRID, 0.05,
                                psi_count=128)
        checked = transient_field(scales, rotated_source, shifted_sine_source, SMALL_GRID, 0.05,
                                  psi_count=128, check_real=True)
        np.testing.assert_array_equal(checked.values, plain.values)


class TestRealPart:
    def test_unchecked_drops_imaginary_part(self):
        values = np.array([1.0 + 0.5j, -2.0 + 0.0j])
        np.testing.assert_array_equal(real_part(values, "field"), [1.0, -2.0])

    def test_checked_raises_on_residue(self):
        values = np.array([1.0 + 1e-6j, -2.0 + 0.0j])
        with pytest.raises(RaywaveError) as exc_info:
            real_part(values, "transient field", check=True)
        assert "transient field" in str(exc_info.value)

    def test_checked_accepts_roundoff(self):
        values = np.array([1.0 + 1e-14j, -2.0 - 1e-15j])
        np.testing.assert_array_equal(real_part(values, "field", check=True), [1.0, -2.0])


class TestPropagatingField:
    @pytest.fixture
    def front(self, constant_velocity):
        return build_front(constant_velocity, 256, [2.0])

    def test_constant_medium(self, front, scales, spatial_source, sine_source):
        grid = GridSpec(x_min=1.8, x_max=2.2, y_min=-0.01, y_max=0.01, nx=5, ny=3)
        pf = ProfileFn(sine_source, spatial_source, scales.omega)
        field = propagating_field(front, pf, scales, grid, 2.0, band=0.5)

        pts = grid.points()
        r = np.linalg.norm(pts, axis=-1)
        psi = np.arctan2(pts[..., 1], pts[..., 0])
        profile = wave_profile(pf, (r - 2.0) / scales.mu, psi)
        # |X_psi| = t = 2 and no caustics
        expected = math.sqrt(scales.mu) * np.real(profile) / math.sqrt(2.0)
        assert not field.mask.any()
        np.testing.assert_allclose(field.values, expected, rtol=1e-5, atol=1e-9)

    def test_outside_band_is_zero(self, front, scales, spatial_source, sine_source):
        grid = GridSpec(x_min=-0.5, x_max=0.5, y_min=-0.5, y_max=0.5, nx=3, ny=3)
        pf = ProfileFn(sine_source, spatial_source, scales.omega)
        field = propagating_field(front, pf, scales, grid, 2.0, band=0.5)
        assert not field.values.any()

    def test_needs_positive_time(self, front, scales, spatial_source, sine_source):
        pf = ProfileFn(sine_source, spatial_source, scales.omega)
        with pytest.raises(ValueError):
            propagating_field(front, pf, scales, SMALL_GRID, 0.0, band=0.5)
