"""Tests for the closed-form transient moments."""

import numpy as np
import pytest

from src.core.waves.errors import UnsupportedModeError
from src.core.waves.sources import TabulatedSource
from src.core.waves.transient import (
    imag_moment,
    imag_moment_quadrature,
    imag_part_coefficients,
    laplace_moments,
    real_moment,
    real_moment_quadrature,
    real_part_coefficients,
)

Z_SAMPLES = [0.5 + 1.0j, 2.0 - 3.0j, 1.2 + 0.1j]


class TestExpansionTables:
    @pytest.mark.parametrize("m", range(1, 8))
    def test_real_part(self, m):
        s = np.linspace(-3.0, 3.0, 13)
        direct = np.real((1 + 1j * s) ** (-m))
        expanded = sum(c * (1 + s * s) ** (-k) for k, c in real_part_coefficients(m).items())
        np.testing.assert_allclose(expanded, direct, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("m", range(1, 8))
    def test_imag_part(self, m):
        s = np.linspace(-3.0, 3.0, 13)
        direct = np.imag((1 + 1j * s) ** (-m))
        expanded = s * sum(c * (1 + s * s) ** (-k) for k, c in imag_part_coefficients(m).items())
        np.testing.assert_allclose(expanded, direct, rtol=1e-12, atol=1e-14)


class TestLaplaceMoments:
    @pytest.mark.parametrize("z", Z_SAMPLES)
    def test_against_quadrature(self, z, laplace_quadrature):
        N, M = laplace_moments(z, 4)
        for k in range(1, 5):
            n_ref = laplace_quadrature(lambda s: (1 + s * s) ** (-k), z)
            m_ref = laplace_quadrature(lambda s: s * (1 + s * s) ** (-k), z)
            assert complex(N[k - 1]) == pytest.approx(n_ref, rel=1e-9)
            assert complex(M[k - 1]) == pytest.approx(m_ref, rel=1e-9)

    def test_shape(self):
        N, M = laplace_moments(np.array([[1.0 + 1j, 2.0], [0.5, 3.0 - 1j]]), 3)
        assert N.shape == M.shape == (2, 2, 3)


class TestRealMoment:
    @pytest.mark.parametrize("fixture", ["sine_source", "shifted_sine_source", "polynomial_source"])
    @pytest.mark.parametrize("T", [0.0, 0.7])
    def test_closed_form_matches_quadrature(self, fixture, T, request):
        src = request.getfixturevalue(fixture)
        z = np.array(Z_SAMPLES)
        np.testing.assert_allclose(real_moment(src, z, T), real_moment_quadrature(src, z, T),
                                   rtol=1e-7, atol=1e-12)

    def test_vectorised_over_z(self, sine_source):
        z = np.array(Z_SAMPLES)
        batch = real_moment(sine_source, z, 0.3)
        single = [complex(real_moment(sine_source, zz, 0.3)) for zz in Z_SAMPLES]
        np.testing.assert_allclose(batch, single, rtol=1e-14)

    def test_decays_with_time(self, sine_source):
        z = 1.0 + 0.5j
        early = abs(complex(real_moment(sine_source, z, 0.2)))
        late = abs(complex(real_moment(sine_source, z, 0.2 + 4 * np.pi / sine_source.alpha)))
        assert late / early == pytest.approx(np.exp(-4 * np.pi / sine_source.alpha), rel=1e-9)

    def test_tabulated_has_no_closed_form(self):
        src = TabulatedSource(dtau=0.5, samples=[0.0, 0.75, 0.0, 0.75, 0.0])
        with pytest.raises(UnsupportedModeError):
            real_moment(src, np.array([1.0 + 0j]), 0.0)


class TestImagMoment:
    @pytest.mark.parametrize("fixture", ["sine_source", "shifted_sine_source", "polynomial_source"])
    def test_closed_form_matches_quadrature(self, fixture, request):
        src = request.getfixturevalue(fixture)
        z = np.array(Z_SAMPLES)
        np.testing.assert_allclose(imag_moment(src, z), imag_moment_quadrature(src, z),
                                   rtol=1e-7, atol=1e-12)
