"""Explicit finite-volume integrator for radially symmetric PKS solutions.

The Poisson coupling is never solved on a grid. For radial data the drift
at radius r is fixed by the mass inside r (Newton's theorem), so on face i

    v_i = (Z - M(r_i)) / (|S^{nu-1}| r_i^{nu-1}),

which also absorbs the point source: it only shifts M by -Z. Face fluxes
are central differences for diffusion plus first-order upwind advection,
with zero flux at r = 0 (zero area) and at r = R (reflecting wall).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from . import _kernels
from .diagnostics import MomentRecord, moment_record
from .mathcore import RadialDensity, check_dimension, sphere_area

log = logging.getLogger(__name__)

# fraction of mass allowed outside R at initialization
TRUNCATION_LIMIT = 0.01
# default cap is this multiple of the initial maximum density
DEFAULT_CAP_FACTOR = 100.0


class Status(str, enum.Enum):
    COMPLETED = "CompletedToTend"
    BLOW_UP = "BlowUpDetected"
    STEP_COLLAPSE = "StepCollapse"


class StepCollapse(RuntimeError):
    """The admissible time step fell below ``dt_min``."""


@dataclass(frozen=True)
class SolverConfig:
    nu: int
    Z: float = 0.0
    R: float = 8.0
    n_cells: int = 2048
    stretch: float = 1.0
    t_end: float = 10.0
    cfl: float = 0.9
    dt_min: float = 1e-14
    rho_cap: float | None = None
    rho_cap_factor: float = DEFAULT_CAP_FACTOR
    snapshot_every: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "nu", check_dimension(self.nu))
        if not math.isfinite(self.Z):
            raise ValueError("Z must be finite")
        if not self.R > 0:
            raise ValueError("R must be positive")
        if int(self.n_cells) != self.n_cells or self.n_cells < 16:
            raise ValueError("n_cells must be an integer >= 16")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        if not self.stretch >= 1:
            raise ValueError("stretch must be >= 1")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")
        if not 0 < self.dt_min < self.t_end:
            raise ValueError("dt_min must satisfy 0 < dt_min < t_end")
        if self.rho_cap is not None and not self.rho_cap > 0:
            raise ValueError("rho_cap must be positive")
        if not self.rho_cap_factor > 1:
            raise ValueError("rho_cap_factor must exceed 1")
        if not self.snapshot_every > 0:
            raise ValueError("snapshot_every must be positive")

    def faces(self) -> np.ndarray:
        n = self.n_cells
        if self.stretch == 1.0:
            return np.linspace(0.0, self.R, n + 1)
        q = self.stretch
        widths = q ** np.arange(n)
        faces = np.concatenate([[0.0], np.cumsum(widths)])
        faces *= self.R / faces[-1]
        faces[-1] = self.R
        return faces

    def resolve_cap(self, rho0: RadialDensity) -> float:
        if self.rho_cap is not None:
            return float(self.rho_cap)
        return self.rho_cap_factor * float(rho0.values.max())


# initial profile families -------------------------------------------------

@dataclass(frozen=True)
class Gaussian:
    sigma: float

    def _check(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def shell_fractions(self, faces, nu):
        # radial CDF of an isotropic Gaussian is the regularized lower gamma
        cdf = gammainc(nu / 2.0, faces**2 / (2.0 * self.sigma**2))
        return np.diff(cdf), 1.0 - cdf[-1]


@dataclass(frozen=True)
class UniformBall:
    radius: float

    def _check(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def shell_fractions(self, faces, nu):
        cdf = (np.minimum(faces, self.radius) / self.radius) ** nu
        return np.diff(cdf), 1.0 - cdf[-1]


@dataclass(frozen=True)
class Ring:
    """Shell density proportional to exp(-(r - center)^2 / (2 width^2))."""

    center: float
    width: float

    _NODES = 8

    def _check(self):
        if not (self.center > 0 and self.width > 0):
            raise ValueError("ring center and width must be positive")

    def _radial_weight(self, r, nu):
        return r ** (nu - 1) * np.exp(-0.5 * ((r - self.center) / self.width) ** 2)

    def _integrate(self, a, b, nu):
        x, wq = np.polynomial.legendre.leggauss(self._NODES)
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        r = mid[:, None] + half[:, None] * x[None, :]
        return half * (self._radial_weight(r, nu) @ wq)

    def shell_fractions(self, faces, nu):
        inside = self._integrate(faces[:-1], faces[1:], nu)
        hi = max(self.center + 12.0 * self.width, faces[-1])
        tail_faces = np.linspace(faces[-1], hi, 257)
        outside = self._integrate(tail_faces[:-1], tail_faces[1:], nu).sum()
        total = inside.sum() + outside
        return inside / total, outside / total


def init_profile(family, mass: float, config: SolverConfig) -> RadialDensity:
    """Cell averages of ``family`` on the config grid, rescaled to ``mass``."""
    family._check()
    if not mass > 0:
        raise ValueError("mass must be positive")
    nu = config.nu
    faces = config.faces()
    fractions, outside = family.shell_fractions(faces, nu)
    if outside > TRUNCATION_LIMIT:
        raise ValueError(
            f"{outside:.3%} of the initial mass lies beyond R={config.R:g}; enlarge R"
        )
    vol = sphere_area(nu) * np.diff(faces**nu) / nu
    values = np.maximum(fractions, 0.0) / vol
    rho = RadialDensity(faces, values, nu)
    return rho.scaled(mass / rho.total_mass())


# mass profile and drift ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class MassProfile:
    faces: np.ndarray
    cumulative: np.ndarray
    nu: int

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])


def cumulative_mass(rho: RadialDensity) -> MassProfile:
    """M(r_i): mass strictly inside each face, from exact cell integrals."""
    cum = np.concatenate([[0.0], np.cumsum(rho.cell_masses())])
    return MassProfile(rho.faces, cum, rho.nu)


def drift_velocity(massprofile: MassProfile, Z: float, at_face: int) -> float:
    """Radial drift on face ``at_face``; negative values point inward."""
    if at_face < 1 or at_face >= massprofile.faces.size:
        raise IndexError(f"face index must be in [1, {massprofile.faces.size - 1}], got {at_face}")
    nu = massprofile.nu
    r = massprofile.faces[at_face]
    return (Z - massprofile.cumulative[at_face]) / (sphere_area(nu) * r ** (nu - 1))


# integrator ----------------------------------------------------------------

class _Geometry:
    """Per-grid constants reused by every step."""

    def __init__(self, faces: np.ndarray, nu: int):
        area_unit = sphere_area(nu)
        n = faces.size - 1
        self.faces = faces
        self.vol = area_unit * np.diff(faces**nu) / nu
        self.vol_inv = 1.0 / self.vol
        self.area = area_unit * faces ** (nu - 1)
        self.area[0] = 0.0
        self.area[-1] = 0.0  # reflecting wall
        centers = 0.5 * (faces[1:] + faces[:-1])
        dr = np.ones(n + 1)
        dr[1:n] = centers[1:] - centers[:-1]
        self.area_dr = self.area / dr
        self.ginv = np.zeros(n + 1)
        self.ginv[1:n] = 1.0 / (area_unit * faces[1:n] ** (nu - 1))
        widths = np.diff(faces)
        self.hmin = float(widths.min())
        self.dt_diff = self.hmin**2 / (2.0 * nu)
        # worst-case per-cell outflow rates; they bound dt for positivity
        self.pos_diff = float(((self.area_dr[:-1] + self.area_dr[1:]) * self.vol_inv).max())
        self.pos_adv = float(((self.area[:-1] + self.area[1:]) * self.vol_inv).max())


def _call_advance(rho, M, geo, config, t, t_stop, cap, max_steps):
    return _kernels.advance(
        rho, M, geo.vol, geo.vol_inv, geo.area, geo.area_dr, geo.ginv,
        config.nu, float(config.Z), float(t), float(t_stop), float(config.cfl),
        geo.dt_diff, geo.hmin, geo.pos_diff, geo.pos_adv, float(cap),
        float(config.dt_min), int(max_steps),
    )


def step(state: RadialDensity, config: SolverConfig) -> tuple[RadialDensity, float]:
    """Advance one explicit step; returns the new state and the step used."""
    if state.nu != config.nu:
        raise ValueError("state and config dimensions differ")
    geo = _Geometry(np.asarray(state.faces), state.nu)
    rho = np.array(state.values)
    M = np.concatenate([[0.0], np.cumsum(rho * geo.vol)])
    mass = M[-1]
    t, steps, status, _, dt, clipped = _call_advance(rho, M, geo, config, 0.0, math.inf, math.inf, 1)
    if status == _kernels.DT_COLLAPSE:
        raise StepCollapse(f"time step fell below dt_min={config.dt_min:g}")
    if status == _kernels.NON_FINITE:
        raise FloatingPointError("non-finite density after step")
    _log_clipped(clipped, mass)
    return state.with_values(rho), dt


def _log_clipped(clipped, mass):
    if clipped > 0 and mass > 0:
        level = logging.WARNING if clipped > 1e-12 * mass else logging.DEBUG
        log.log(level, "clipped %.3e of mass (%.3e relative)", clipped, clipped / mass)


@dataclass
class SimulationOutcome:
    status: Status
    detected_time: float | None
    trajectory: list[MomentRecord]
    final_state: RadialDensity
    rho_cap: float
    steps: int
    clipped_mass: float
    states: list[tuple[float, RadialDensity]] | None = None

    @property
    def final_max_density(self) -> float:
        return float(self.final_state.values.max())

    def summary(self) -> str:
        t = "nan" if self.detected_time is None else f"{self.detected_time:.17g}"
        return (f"status={self.status.value} detected_time={t} "
                f"final_max_density={self.final_max_density:.17g}")

    def snapshot_csv(self) -> str:
        lines = ["t,m0,m2,m_numinus2,m_nu,max_density,dt,mass_in_core,wall_density"]
        for rec in self.trajectory:
            lines.append(",".join(f"{x:.17g}" for x in rec.as_row()))
        return "\n".join(lines) + "\n"


def run(config: SolverConfig, rho0: RadialDensity, *, keep_states: bool = False,
        max_steps: int = 2**62) -> SimulationOutcome:
    """Integrate until ``t_end``, density-cap exceedance, or step collapse.

    Snapshots are taken every ``snapshot_every`` and at the stopping time.
    ``detected_time`` is the first time the cap is exceeded (or the step
    collapses); it is a grid- and cap-dependent proxy, not the blow-up time.
    """
    if rho0.nu != config.nu:
        raise ValueError("initial state and config dimensions differ")
    geo = _Geometry(np.asarray(rho0.faces), config.nu)
    cap = config.resolve_cap(rho0)
    rho = np.array(rho0.values)
    M = np.concatenate([[0.0], np.cumsum(rho * geo.vol)])
    mass0 = M[-1]
    if not mass0 > 0:
        raise ValueError("initial state has no mass")

    t = 0.0
    steps_total = 0
    clipped_total = 0.0
    last_dt = 0.0
    trajectory = [moment_record(rho0, 0.0, last_dt)]
    states = [(0.0, rho0)] if keep_states else None
    status = Status.COMPLETED
    detected = None
    k = 0
    while t < config.t_end:
        k += 1
        t_next = min(k * config.snapshot_every, config.t_end)
        if t_next <= t:
            continue
        remaining = max_steps - steps_total
        if remaining <= 0:
            raise RuntimeError("step budget exhausted")
        t, n_steps, code, _, dt, clipped = _call_advance(rho, M, geo, config, t, t_next, cap, remaining)
        steps_total += n_steps
        clipped_total += clipped
        if dt > 0:
            last_dt = dt
        if code == _kernels.NON_FINITE:
            raise FloatingPointError(f"non-finite density at t={t:.6g}")
        if code == _kernels.MAX_STEPS:
            raise RuntimeError("step budget exhausted")
        state = rho0.with_values(rho)
        if code == _kernels.REACHED_T_STOP:
            trajectory.append(moment_record(state, t, last_dt))
            if keep_states:
                states.append((t, state))
            continue
        if t > trajectory[-1].t:
            trajectory.append(moment_record(state, t, last_dt))
            if keep_states:
                states.append((t, state))
        detected = t
        status = Status.BLOW_UP if code == _kernels.CAP_EXCEEDED else Status.STEP_COLLAPSE
        break

    _log_clipped(clipped_total, mass0)
    final = rho0.with_values(rho)
    return SimulationOutcome(status, detected, trajectory, final, cap, steps_total,
                             clipped_total, states)
