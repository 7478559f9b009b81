import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kslab import (RadialDensity, gamma_half_integer, interpolation_residual, moment, moments,
                   sphere_area, unit_sphere_area)
from kslab.mathcore import check_dimension, refine
from strategies import dims, radial_densities


@pytest.mark.parametrize("two_k, expected", [
    (2, 1.0),
    (1, math.sqrt(math.pi)),
    (5, 0.75 * math.sqrt(math.pi)),
    (4, 1.0),
    (9, 105.0 / 16.0 * math.sqrt(math.pi)),
])
def test_gamma_half_integer_values(two_k, expected):
    assert gamma_half_integer(two_k) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("two_k", range(1, 41))
def test_gamma_matches_math_gamma(two_k):
    assert gamma_half_integer(two_k) == pytest.approx(math.gamma(two_k / 2), rel=1e-13)


@pytest.mark.parametrize("bad", [0, -1, 2.5, True])
def test_gamma_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        gamma_half_integer(bad)


def test_sphere_area_values():
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-15)
    assert unit_sphere_area(1) == 2.0


@pytest.mark.parametrize("nu", range(2, 11))
def test_sphere_area_recurrence(nu):
    assert sphere_area(nu + 2) == pytest.approx(2 * math.pi * sphere_area(nu) / nu, rel=1e-14)


@pytest.mark.parametrize("bad", [1, 0, 2.5, "x", True])
def test_dimension_validation(bad):
    with pytest.raises((ValueError, TypeError)):
        check_dimension(bad)


def test_radial_density_validation():
    with pytest.raises(ValueError):
        RadialDensity([0.1, 1.0], [1.0], 2)
    with pytest.raises(ValueError):
        RadialDensity([0.0, 1.0, 1.0], [1.0, 1.0], 2)
    with pytest.raises(ValueError):
        RadialDensity([0.0, 1.0], [-1.0], 2)
    with pytest.raises(ValueError):
        RadialDensity([0.0, 1.0], [np.nan], 2)
    with pytest.raises(ValueError):
        RadialDensity([0.0, 1.0], [1.0, 2.0], 2)
    rho = RadialDensity([0.0, 1.0], [1.0], 3)
    with pytest.raises(ValueError):
        rho.values[0] = 2.0


@pytest.mark.parametrize("nu", [2, 3, 4, 5])
def test_uniform_ball_mass(nu):
    c, R = 2.5, 1.7
    rho = RadialDensity(np.linspace(0, R, 7), np.full(6, c), nu)
    assert moment(rho, 0) == pytest.approx(c * sphere_area(nu) * R**nu / nu, rel=1e-14)
    assert moment(rho, 0) == pytest.approx(rho.cell_masses().sum(), rel=1e-14)


def test_moment_rejects_negative_order():
    rho = RadialDensity([0.0, 1.0], [1.0], 2)
    with pytest.raises(ValueError):
        moment(rho, -0.5)


@pytest.mark.parametrize("nu, mu", [(2, 2), (3, 3), (4, 2), (5, 1.5)])
def test_gaussian_moment(nu, mu):
    # E|X|^mu for an isotropic Gaussian with scale sigma
    sigma, mass = 0.8, 3.0
    faces = np.linspace(0, 10 * sigma, 8001)
    r = 0.5 * (faces[1:] + faces[:-1])
    values = mass * np.exp(-r**2 / (2 * sigma**2)) / (2 * math.pi * sigma**2) ** (nu / 2)
    rho = RadialDensity(faces, values, nu)
    expected = mass * (2 * sigma**2) ** (mu / 2) * math.gamma((mu + nu) / 2) / math.gamma(nu / 2)
    assert moment(rho, mu) == pytest.approx(expected, rel=1e-5)


@given(radial_densities(), st.floats(0.0, 6.0), st.floats(1e-3, 1e3))
def test_moment_linear(rho, mu, c):
    assert moment(rho.scaled(c), mu) == pytest.approx(c * moment(rho, mu), rel=1e-12)


@given(radial_densities(), st.floats(0.0, 6.0), st.integers(2, 4))
def test_refinement_leaves_moments_unchanged(rho, mu, factor):
    fine = refine(rho, factor)
    assert fine.n_cells == factor * rho.n_cells
    assert moment(fine, mu) == pytest.approx(moment(rho, mu), rel=1e-12)


@given(radial_densities())
def test_interpolation_residual_nonnegative(rho):
    m2 = moment(rho, 2)
    assert interpolation_residual(rho) >= -1e-9 * m2


@given(radial_densities(nu=2))
def test_interpolation_residual_zero_in_2d(rho):
    assert interpolation_residual(rho) == 0.0


@pytest.mark.parametrize("nu", [3, 4, 5])
def test_interpolation_residual_thin_shell(nu):
    # equality case: all mass at one radius
    prev = math.inf
    for width in (1e-1, 1e-2, 1e-3):
        rho = RadialDensity([0.0, 1.0 - width, 1.0], [0.0, 1.0], nu)
        res = interpolation_residual(rho) / moment(rho, 2)
        assert 0 <= res < prev
        prev = res
    assert prev < 1e-6


def test_interpolation_residual_two_bumps():
    faces = np.array([0.0, 0.9, 1.1, 2.9, 3.1])
    rho = RadialDensity(faces, [0.0, 1.0, 0.0, 1.0], 3)
    # independent check with dense midpoint sums
    r = np.linspace(0, 3.1, 310001)
    rm = 0.5 * (r[1:] + r[:-1])
    dens = np.where((rm > 0.9) & (rm < 1.1) | (rm > 2.9), 1.0, 0.0)
    w = 4 * math.pi * rm**2 * np.diff(r) * dens
    m0, m2, m3 = w.sum(), (w * rm**2).sum(), (w * rm**3).sum()
    expected = m0 ** (1 / 3) * m3 ** (2 / 3) - m2
    assert expected > 0
    assert interpolation_residual(rho) == pytest.approx(expected, rel=1e-5)


def test_moments_vector():
    rho = RadialDensity([0.0, 1.0, 2.0], [1.0, 0.5], 3)
    np.testing.assert_allclose(moments(rho, [0, 1, 3]), [moment(rho, m) for m in (0, 1, 3)])


@settings(max_examples=50)
@given(dims)
def test_centers_and_volumes(nu):
    rho = RadialDensity([0.0, 1.0, 3.0], [1.0, 1.0], nu)
    np.testing.assert_allclose(rho.centers, [0.5, 2.0])
    assert rho.cell_volumes().sum() == pytest.approx(sphere_area(nu) * 3.0**nu / nu)
