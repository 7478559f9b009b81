import os
import subprocess
import sys

import numpy as np
import pytest

from kslab import Gaussian, SolverConfig, init_profile, interaction_integral, run
from kslab import _accel, _kernels
from kslab.diagnostics import _pair_radii, angular_nodes
from kslab.solver import _Geometry

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def _flag_value(env_value):
    env = dict(os.environ, KSLAB_NO_NUMBA=env_value)
    code = "import kslab; print(kslab.backend_name())"
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                          text=True, check=True).stdout.strip()


def test_env_flag_selects_numpy():
    assert _flag_value("1") == "numpy"
    assert _flag_value("true") == "numpy"
    assert _flag_value("0") == "numba"
    assert _flag_value("") == "numba"


@pytest.mark.parametrize("nu, Z", [(2, 0.0), (3, -2.0), (4, 5.0)])
def test_advance_backends_agree(nu, Z):
    cfg = SolverConfig(nu=nu, Z=Z, n_cells=300)
    rho0 = init_profile(Gaussian(1.0), 30.0, cfg)
    geo = _Geometry(np.asarray(rho0.faces), nu)
    results = []
    for kernel in (_kernels.advance_numba, _kernels.advance_numpy):
        rho = np.array(rho0.values)
        M = np.concatenate([[0.0], np.cumsum(rho * geo.vol)])
        res = kernel(rho, M, geo.vol, geo.vol_inv, geo.area, geo.area_dr, geo.ginv, nu, Z,
                     0.0, 0.05, 0.9, geo.dt_diff, geo.hmin, geo.pos_diff, geo.pos_adv,
                     np.inf, 1e-14, 10**7)
        results.append((rho, M, res))
    (r1, m1, a), (r2, m2, b) = results
    assert a[1] == b[1] and a[2] == b[2] == _kernels.REACHED_T_STOP
    np.testing.assert_allclose(r1, r2, rtol=1e-12, atol=1e-14 * r2.max())
    np.testing.assert_allclose(m1, m2, rtol=1e-12, atol=1e-14 * m2[-1])


@pytest.mark.parametrize("nu", [2, 3, 5])
def test_pair_sum_backends_agree(nu):
    cfg = SolverConfig(nu=nu, n_cells=64, R=6.0)
    rho = init_profile(Gaussian(1.0), 2.0, cfg)
    r, m = _pair_radii(rho)
    w, wt = angular_nodes(nu, float(np.min(1 - r[:-1] / r[1:])))
    a = _kernels.pair_sum_numba(r, m, w, wt, nu)
    b = _kernels.pair_sum_numpy(r, m, w, wt, nu)
    assert a == pytest.approx(b, rel=1e-12)


def test_full_run_same_outcome_on_both_backends(monkeypatch):
    cfg = SolverConfig(nu=2, n_cells=128, t_end=2.0, snapshot_every=0.5)
    rho0 = init_profile(Gaussian(1.0), 1.5 * 8 * np.pi, cfg)
    fast = run(cfg, rho0)
    monkeypatch.setattr(_accel, "USE_NUMBA", False)
    slow = run(cfg, rho0)
    assert fast.status == slow.status
    assert fast.steps == slow.steps
    assert fast.detected_time == pytest.approx(slow.detected_time, rel=1e-12)
    assert interaction_integral(slow.final_state) == pytest.approx(
        interaction_integral(fast.final_state), rel=1e-10)
