"""Tests for velocity fields."""

import numpy as np
import pytest

from src.core.waves.velocity import (
    ConstantVelocity,
    GaussianBumpVelocity,
    TabulatedVelocity,
    gaussian_lens,
    load_velocity_table,
)


class TestGaussianBumps:
    @pytest.fixture
    def field(self):
        return GaussianBumpVelocity(1.0, [((0.5, -0.2), 0.3, 0.8), ((-1.0, 1.0), -0.2, 0.5)])

    def test_gradient_matches_differences(self, field):
        x, e = np.array([0.1, 0.4]), 1e-6
        steps = (np.array([e, 0.0]), np.array([0.0, e]))
        numeric = [(field.c(x + d) - field.c(x - d)) / (2 * e) for d in steps]
        np.testing.assert_allclose(field.grad(x), numeric, rtol=1e-7)

    def test_hessian_matches_differences(self, field):
        x, e = np.array([-0.6, 0.7]), 1e-5
        steps = (np.array([e, 0.0]), np.array([0.0, e]))
        cols = [(field.grad(x + d) - field.grad(x - d)) / (2 * e) for d in steps]
        np.testing.assert_allclose(field.hessian(x), np.stack(cols, axis=-1), rtol=1e-6, atol=1e-9)

    def test_batched_shapes(self, field):
        x = np.zeros((4, 3, 2))
        assert field.c(x).shape == (4, 3)
        assert field.grad(x).shape == (4, 3, 2)
        assert field.hessian(x).shape == (4, 3, 2, 2)

    def test_constant_beyond_stabilisation_radius(self, field):
        far = np.array([field.r_stab + 0.1, 0.0])
        assert float(field.c(far)) == 1.0
        assert not field.grad(far).any()

    def test_rejects_nonpositive_floor(self):
        with pytest.raises(ValueError):
            GaussianBumpVelocity(1.0, [((0.0, 0.0), -1.2, 1.0)])


class TestLens:
    def test_origin_value(self):
        lens = gaussian_lens(depth=0.3, center=[0.0, 0.0], width=1.0)
        assert lens.c0 == pytest.approx(0.7)
        assert lens.c_max(5.0) == 1.0

    def test_constant_field(self):
        c = ConstantVelocity(2.5)
        assert c.c0 == 2.5
        assert c.c_max(10.0) == 2.5
        with pytest.raises(ValueError):
            ConstantVelocity(0.0)


class TestTabulated:
    def test_reproduces_smooth_field(self):
        xs = np.linspace(-2.0, 2.0, 41)
        xx, yy = np.meshgrid(xs, xs)
        values = 1.0 + 0.1 * np.sin(xx) * np.cos(yy)
        table = TabulatedVelocity(-2.0, 2.0, -2.0, 2.0, values)
        x = np.array([0.33, -0.71])
        assert float(table.c(x)) == pytest.approx(1.0 + 0.1 * np.sin(0.33) * np.cos(-0.71), rel=1e-6)
        grad = table.grad(x)
        assert grad[0] == pytest.approx(0.1 * np.cos(0.33) * np.cos(-0.71), rel=1e-3)

    def test_clamped_outside(self):
        table = TabulatedVelocity(-1.0, 1.0, -1.0, 1.0, np.full((5, 5), 1.2))
        assert float(table.c(np.array([5.0, 0.0]))) == pytest.approx(1.2)
        assert not table.grad(np.array([5.0, 0.0])).any()

    def test_load_checks_count(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("-1 1 -1 1 4 4\n" + " ".join(["1.0"] * 15) + "\n")
        with pytest.raises(ValueError):
            load_velocity_table(path)

    def test_load_checks_header(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("-1 1 -1 1 4\n")
        with pytest.raises(ValueError):
            load_velocity_table(path)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            TabulatedVelocity(-1.0, 1.0, -1.0, 1.0, np.zeros((4, 4)))
