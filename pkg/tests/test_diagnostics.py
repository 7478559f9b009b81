import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import quad

from kslab import (Gaussian, RadialDensity, SolverConfig, Status, V_tau, hoelder_rhs,
                   init_profile, interaction_integral, moment, moment_derivative_exact,
                   monitor_trajectory, run, sphere_area, unit_sphere_area)
from kslab import _kernels
from kslab.diagnostics import (MIN_ANGULAR_NODES, QuadratureError, angular_nodes,
                               centered_derivative, moment_derivative_terms, moment_record)
from strategies import radial_densities, random_density

PI = math.pi


@pytest.mark.parametrize("nu", range(2, 7))
@pytest.mark.parametrize("delta", [1.0, 1e-2, 1e-5])
def test_angular_nodes_normalized(nu, delta):
    w, wt = angular_nodes(nu, delta)
    assert w.size >= MIN_ANGULAR_NODES
    assert np.all((w > 0) & (w < 2))
    assert wt.sum() == pytest.approx(1.0, rel=1e-10)
    # the refined rule actually returned by interaction_integral
    assert angular_nodes(nu, delta, 16)[1].sum() == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("nu", range(2, 7))
@pytest.mark.parametrize("tau", [0.05, 0.5, 0.95, 0.999])
def test_angular_average_against_adaptive_quadrature(nu, tau):
    def integrand(th):
        return float(V_tau(nu, tau, math.cos(th))) * math.sin(th) ** (nu - 2)

    ref, _ = quad(integrand, 0.0, PI, limit=500, points=[1 - tau])
    ref *= unit_sphere_area(nu - 1) / unit_sphere_area(nu)
    w, wt = angular_nodes(nu, 1 - tau)
    r = np.array([tau, 1.0])
    m = np.array([0.0, 1.0])
    # a single off-diagonal pair: total = 2 * m_i * m_j * average
    m[0] = 1.0
    diag = 2 * float(np.dot(wt, V_tau(nu, 1.0, 1 - w)))
    total = _kernels.pair_sum(r, m, w, wt, nu)
    assert (total - diag) / 2 == pytest.approx(ref, rel=1e-8)
    assert ref == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("nu", range(2, 7))
def test_interaction_integral_equals_mass_squared(nu):
    rng = np.random.default_rng(nu)
    for _ in range(5):
        rho = random_density(rng, nu)
        assert interaction_integral(rho) == pytest.approx(moment(rho, 0) ** 2, rel=1e-10)


def test_interaction_integral_empty_and_single_cell():
    assert interaction_integral(RadialDensity([0.0, 1.0, 2.0], [0.0, 0.0], 3)) == 0.0
    rho = RadialDensity([0.0, 1.0, 2.0], [0.0, 1.0], 3)
    assert interaction_integral(rho) == pytest.approx(moment(rho, 0) ** 2, rel=1e-12)


def test_quadrature_check_raises():
    rho = random_density(np.random.default_rng(0), 3, n_cells=30)
    with pytest.raises(QuadratureError):
        interaction_integral(rho, rtol=0.0)


@pytest.mark.parametrize("Z", [-3.0, 0.0, 2.0])
def test_two_dimensional_identity(Z):
    rng = np.random.default_rng(11)
    for _ in range(5):
        rho = random_density(rng, 2)
        m0 = moment(rho, 0)
        expected = 4 * m0 + m0 * Z / PI - m0**2 / (2 * PI)
        assert moment_derivative_exact(rho, Z) == pytest.approx(expected, rel=1e-10, abs=1e-10 * m0)


@settings(max_examples=40, deadline=None)
@given(radial_densities(max_cells=25))
def test_exact_rhs_below_hoelder_rhs(rho):
    for Z in (-4.0, 0.0, 4.0):
        terms = moment_derivative_terms(rho, Z)
        h = hoelder_rhs(rho.nu, Z, moment(rho, 0), moment(rho, rho.nu))
        assert terms.total <= h + 1e-6 * terms.scale


def test_thin_ring_terms_against_dense_quadrature():
    # shell of width 0.02 at radius 1 in three dimensions
    faces = np.concatenate([np.linspace(0, 0.99, 100, endpoint=False), np.linspace(0.99, 1.01, 21)])
    values = np.zeros(faces.size - 1)
    values[100:] = 1.0
    rho = RadialDensity(faces, values, 3)
    rho = rho.scaled(1.0 / rho.total_mass())
    t = moment_derivative_terms(rho, 0.0)
    # dense midpoint sums, independent of the moment routine
    r = np.linspace(0.99, 1.01, 200001)
    rm = 0.5 * (r[1:] + r[:-1])
    shell = 4 * PI * rm**2 * np.diff(r)
    shell /= shell.sum()
    m1 = float(np.dot(shell, rm))
    assert t.diffusion == pytest.approx(2 * 3 * 2 * m1, rel=1e-3)
    assert t.interaction == pytest.approx(-3 / (2 * 4 * PI) * 1.0, rel=1e-3)


def test_quadrature_node_doubling_converges():
    cfg = SolverConfig(nu=4, R=6.0, n_cells=256)
    rho = init_profile(Gaussian(1.0), 3.0, cfg)
    a = moment_derivative_exact(rho, 1.0, n_per_panel=8, check=False)
    b = moment_derivative_exact(rho, 1.0, n_per_panel=16, check=False)
    assert b == pytest.approx(a, rel=1e-6)


def test_centered_derivative_exact_for_quadratics():
    t = np.array([0.0, 0.1, 0.35, 0.4, 1.0])
    y = 3 * t**2 - 2 * t + 1
    d = centered_derivative(t, y)
    assert np.isnan(d[0]) and np.isnan(d[-1])
    np.testing.assert_allclose(d[1:-1], 6 * t[1:-1] - 2, rtol=1e-12)


def test_moment_record_fields():
    rho = RadialDensity(np.linspace(0, 2, 9), np.arange(1.0, 9.0), 3)
    rec = moment_record(rho, 0.5, 1e-3)
    assert rec.m0 == pytest.approx(moment(rho, 0))
    assert rec.m_numinus2 == pytest.approx(moment(rho, 1))
    assert rec.max_density == 8.0 and rec.wall_density == 8.0
    assert 0 < rec.mass_in_core < 1
    assert len(rec.as_row()) == 9


def _subcritical_states():
    cfg = SolverConfig(nu=2, n_cells=256, t_end=1.0, snapshot_every=0.1)
    out = run(cfg, init_profile(Gaussian(1.0), 0.5 * 8 * PI, cfg), keep_states=True)
    return out.states


def test_monitor_subcritical_run():
    rep = monitor_trajectory(_subcritical_states(), 0.0)
    assert rep.ok and not rep.violation.any()
    assert not rep.predicted_at_t0
    assert rep.checked.sum() == rep.times.size - 2
    lines = rep.csv().splitlines()
    assert lines[0].startswith("# nu=2")
    assert lines[1] == "t,dmnu_dt_fd,rhs_exact,rhs_hoelder,violation"
    assert len(lines) == 2 + rep.times.size


def test_monitor_marks_near_singular_snapshots():
    rep = monitor_trajectory(_subcritical_states(), 0.0, detected=True)
    assert rep.near_singular.sum() == 6
    assert np.all(rep.near_singular[-6:])
    assert rep.csv().splitlines()[-1].endswith("near-singular")


def test_monitor_flags_violations():
    # an artificial outward dilation grows M_2 far faster than the identity allows
    cfg = SolverConfig(nu=2, n_cells=128)
    base = init_profile(Gaussian(0.5), 30.0, cfg)
    states = []
    for k in range(6):
        lam = 1.0 + 0.5 * k
        states.append((0.01 * k, RadialDensity(base.faces * lam, base.values / lam**2, 2)))
    rep = monitor_trajectory(states, 0.0)
    assert rep.violation.any() and not rep.ok
    assert rep.max_violation > 0


def test_monitor_rejects_bad_input():
    states = _subcritical_states()
    with pytest.raises(ValueError):
        monitor_trajectory(states[:2], 0.0)
    with pytest.raises(ValueError):
        monitor_trajectory([states[0], states[2], states[1]], 0.0)


def test_hoelder_rhs_input_checks():
    with pytest.raises(ValueError):
        hoelder_rhs(3, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        hoelder_rhs(3, 0.0, 1.0, -1.0)
    assert hoelder_rhs(3, 0.0, 1.0, 0.0) == pytest.approx(-3 / (16 * PI))
    assert sphere_area(3) == pytest.approx(4 * PI)
