"""Moment identities along radial trajectories.

For a classical solution the nu-th moment obeys

    d/dt M_nu = 2 nu (nu-1) M_{nu-2} + nu Z M_0 / |S^{nu-1}|
                - nu / (2 |S^{nu-1}|) * iint V(x, y) rho(x) rho(y) dx dy,

and bounding V below by 2^{2-nu} and M_{nu-2} by Hoelder gives

    d/dt M_nu <= 2 nu (nu-1) M_nu^{(nu-2)/nu} M_0^{2/nu}
                 - nu 2^{1-nu} M_0^2 / |S^{nu-1}| + nu Z M_0 / |S^{nu-1}|.

``moment_derivative_exact`` evaluates the first right-hand side by
quadrature, ``hoelder_rhs`` the second, and ``monitor_trajectory`` compares
both with finite differences of simulated moments.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .criterion import criterion_lhs, evaluate_criterion
from .mathcore import RadialDensity, check_dimension, moment, sphere_area, unit_sphere_area

CORE_CELLS = 4
MIN_ANGULAR_NODES = 64


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class MomentRecord:
    t: float
    m0: float
    m2: float
    m_numinus2: float
    m_nu: float
    max_density: float
    dt: float
    mass_in_core: float
    wall_density: float

    def as_row(self) -> tuple:
        return (self.t, self.m0, self.m2, self.m_numinus2, self.m_nu,
                self.max_density, self.dt, self.mass_in_core, self.wall_density)


def moment_record(rho: RadialDensity, t: float, dt: float) -> MomentRecord:
    nu = rho.nu
    masses = rho.cell_masses()
    m0 = moment(rho, 0.0)
    core = float(masses[:CORE_CELLS].sum()) / m0 if m0 > 0 else 0.0
    return MomentRecord(
        t=float(t),
        m0=m0,
        m2=moment(rho, 2.0),
        m_numinus2=moment(rho, float(nu - 2)),
        m_nu=moment(rho, float(nu)),
        max_density=float(rho.values.max()),
        dt=float(dt),
        mass_in_core=core,
        wall_density=float(rho.values[-1]),
    )


def hoelder_rhs(nu, Z: float, m0: float, m_nu: float) -> float:
    nu = check_dimension(nu)
    if not m0 > 0:
        raise ValueError(f"total mass must be positive, got {m0!r}")
    if not m_nu >= 0:
        raise ValueError(f"M_nu must be nonnegative, got {m_nu!r}")
    area = sphere_area(nu)
    diffusion = 2.0 * nu * (nu - 1) * criterion_lhs(nu, m_nu) * m0 ** (2.0 / nu)
    aggregation = nu * 2.0 ** (1 - nu) / area * m0**2
    return diffusion - aggregation + nu * Z / area * m0


# angular quadrature ----------------------------------------------------------

def angular_nodes(nu: int, delta_min: float, n_per_panel: int = 8):
    """Composite Gauss-Legendre rule in theta on [0, pi], graded toward 0.

    Panels are dyadic, [pi 2^{-k-1}, pi 2^{-k}], down to a width below
    ``delta_min / 4`` so the peak of V at theta ~ |r - s| / max(r, s) is
    resolved for every cell pair. Returns ``(w, wt)`` with w = 1 - cos(theta)
    and wt the weights times sin^{nu-2}(theta) |S^{nu-2}| / |S^{nu-1}|, so
    sum(wt * V) is the angular average of V.
    """
    delta_min = min(max(delta_min, 1e-15), 1.0)
    n_panels = max(3, math.ceil(math.log2(4.0 * math.pi / delta_min)))
    n_per_panel = max(n_per_panel, math.ceil(MIN_ANGULAR_NODES / n_panels))
    edges = np.concatenate([[0.0], math.pi * 2.0 ** -np.arange(n_panels - 1, -1, -1, dtype=float)])
    x, wq = np.polynomial.legendre.leggauss(n_per_panel)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    theta = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weight = (half[:, None] * wq[None, :]).ravel()
    w = 2.0 * np.sin(0.5 * theta) ** 2
    norm = unit_sphere_area(nu - 1) / unit_sphere_area(nu)
    wt = weight * np.sin(theta) ** (nu - 2) * norm
    return w, wt


def _pair_radii(rho: RadialDensity):
    # mass centroid of each shell, restricted to cells carrying mass
    nu = rho.nu
    f = rho.faces
    r_bar = nu / (nu + 1.0) * np.diff(f ** (nu + 1)) / np.diff(f**nu)
    masses = rho.cell_masses()
    keep = masses > 0
    return r_bar[keep], masses[keep]


def interaction_integral(rho: RadialDensity, *, n_per_panel: int = 8,
                         check: bool = True, rtol: float = 1e-4) -> float:
    """iint V(x, y) rho(x) rho(y) dx dy for a radial density.

    Uses the angular reduction: for shells at radii r, s the integral over
    directions equals m_r m_s times the angular average of V(r, s, cos theta)
    with weight sin^{nu-2}. Each cell is represented by its mass centroid.
    With ``check`` the rule is repeated with twice the nodes per panel and a
    relative disagreement above ``rtol`` raises ``QuadratureError``.
    """
    r, m = _pair_radii(rho)
    if r.size == 0:
        return 0.0
    if r.size > 1:
        delta_min = float(np.min(1.0 - r[:-1] / r[1:]))
    else:
        delta_min = 1.0
    w, wt = angular_nodes(rho.nu, delta_min, n_per_panel)
    value = _kernels.pair_sum(r, m, w, wt, rho.nu)
    if not check:
        return value
    w2, wt2 = angular_nodes(rho.nu, delta_min, 2 * n_per_panel)
    refined = _kernels.pair_sum(r, m, w2, wt2, rho.nu)
    if not math.isfinite(refined) or abs(refined - value) > rtol * abs(refined):
        raise QuadratureError(
            f"angular quadrature not converged: {value!r} vs {refined!r} "
            f"(n_per_panel={n_per_panel}, nodes={w.size}/{w2.size}, delta_min={delta_min:.3e}, "
            f"cells={r.size})"
        )
    return refined


@dataclass(frozen=True)
class MomentDerivative:
    diffusion: float
    source: float
    interaction: float

    @property
    def total(self) -> float:
        return self.diffusion + self.source + self.interaction

    @property
    def scale(self) -> float:
        return abs(self.diffusion) + abs(self.source) + abs(self.interaction)


def moment_derivative_terms(rho: RadialDensity, Z: float, **quad) -> MomentDerivative:
    nu = rho.nu
    area = sphere_area(nu)
    m0 = moment(rho, 0.0)
    return MomentDerivative(
        diffusion=2.0 * nu * (nu - 1) * moment(rho, float(nu - 2)),
        source=nu * Z * m0 / area,
        interaction=-nu / (2.0 * area) * interaction_integral(rho, **quad),
    )


def moment_derivative_exact(rho: RadialDensity, Z: float, **quad) -> float:
    """Right-hand side of the exact d/dt M_nu identity, by quadrature."""
    return moment_derivative_terms(rho, Z, **quad).total


# trajectory monitoring ---------------------------------------------------------

def centered_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Three-point centered differences on a nonuniform grid; NaN at the ends."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.full(y.shape, np.nan)
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    out[1:-1] = (h1**2 * y[2:] - h2**2 * y[:-2] + (h2**2 - h1**2) * y[1:-1]) / (h1 * h2 * (h1 + h2))
    return out


@dataclass
class InequalityReport:
    nu: int
    Z: float
    times: np.ndarray
    m_nu: np.ndarray
    lhs_fd: np.ndarray
    rhs_exact: np.ndarray
    rhs_hoelder: np.ndarray
    scale: np.ndarray
    near_singular: np.ndarray
    tol_rel: float
    tol_abs: float
    predicted_at_t0: bool
    margin_at_t0: float

    @property
    def tol(self) -> np.ndarray:
        return self.tol_rel * self.scale + self.tol_abs

    @property
    def checked(self) -> np.ndarray:
        return np.isfinite(self.lhs_fd) & ~self.near_singular

    @property
    def violation(self) -> np.ndarray:
        return self.checked & (self.lhs_fd > self.rhs_exact + self.tol)

    @property
    def hoelder_violation(self) -> np.ndarray:
        return ~self.near_singular & (self.rhs_exact > self.rhs_hoelder + self.tol)

    @property
    def max_violation(self) -> float:
        """Largest lhs_fd - rhs_exact - tol over checked snapshots (> 0 means violated)."""
        excess = (self.lhs_fd - self.rhs_exact - self.tol)[self.checked]
        return float(excess.max()) if excess.size else -math.inf

    @property
    def tol_used(self) -> str:
        return f"{self.tol_rel:g} * scale + {self.tol_abs:g}"

    @property
    def m_nu_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.m_nu) < 0))

    @property
    def ok(self) -> bool:
        return not (self.violation.any() or self.hoelder_violation.any())

    def summary(self) -> str:
        return (f"nu={self.nu} Z={self.Z:.10g} snapshots={self.times.size} "
                f"checked={int(self.checked.sum())} violations={int(self.violation.sum())} "
                f"hoelder_violations={int(self.hoelder_violation.sum())} "
                f"max_violation={self.max_violation:.6g} tol={self.tol_used} "
                f"predicted_at_t0={self.predicted_at_t0} m_nu_decreasing={self.m_nu_decreasing}")

    def csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.summary()}\n")
        buf.write("t,dmnu_dt_fd,rhs_exact,rhs_hoelder,violation\n")
        for i in range(self.times.size):
            flag = "near-singular" if self.near_singular[i] else str(int(self.violation[i]))
            buf.write(f"{self.times[i]:.17g},{self.lhs_fd[i]:.17g},{self.rhs_exact[i]:.17g},"
                      f"{self.rhs_hoelder[i]:.17g},{flag}\n")
        return buf.getvalue()


def monitor_trajectory(trajectory, Z: float, *, rel_tol: float = 0.05, abs_tol: float = 1e-8,
                       detected: bool = False, near_singular_count: int = 5,
                       **quad) -> InequalityReport:
    """Compare measured d/dt M_nu with the exact and Hoelder right-hand sides.

    ``trajectory`` is a sequence of ``(t, RadialDensity)``. The tolerance is
    ``rel_tol`` times the sum of the absolute values of the three terms of the
    exact identity, plus ``abs_tol``. When ``detected`` is true the last
    ``near_singular_count + 1`` snapshots (the detection snapshot and the five
    before it) are marked near-singular and reported but not checked.
    """
    trajectory = list(trajectory)
    if len(trajectory) < 3:
        raise ValueError("need at least three snapshots")
    nu = trajectory[0][1].nu
    times = np.array([t for t, _ in trajectory], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    m_nu = np.array([moment(rho, float(nu)) for _, rho in trajectory])
    m0 = np.array([moment(rho, 0.0) for _, rho in trajectory])
    terms = [moment_derivative_terms(rho, Z, **quad) for _, rho in trajectory]
    rhs_exact = np.array([d.total for d in terms])
    scale = np.array([d.scale for d in terms])
    rhs_h = np.array([hoelder_rhs(nu, Z, a, b) for a, b in zip(m0, m_nu)])
    near = np.zeros(times.size, dtype=bool)
    if detected:
        near[max(0, times.size - 1 - near_singular_count):] = True
    verdict = evaluate_criterion(nu, Z, m0[0], m_nu[0])
    return InequalityReport(
        nu=nu, Z=float(Z), times=times, m_nu=m_nu,
        lhs_fd=centered_derivative(times, m_nu), rhs_exact=rhs_exact, rhs_hoelder=rhs_h,
        scale=scale, near_singular=near, tol_rel=rel_tol, tol_abs=abs_tol,
        predicted_at_t0=verdict.blow_up, margin_at_t0=verdict.margin,
    )
