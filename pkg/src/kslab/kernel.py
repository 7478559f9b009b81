"""Interaction kernel and the symmetrized pair integrand V.

With r = |x|, s = |y|, u = cos(angle between x and y) and tau = r/s,

    V = (tau^{nu/2} + tau^{-nu/2} - (tau^{nu/2-1} + tau^{1-nu/2}) u)
        / (tau + 1/tau - 2u)^{nu/2}.

The code evaluates this tau-form in terms of w = 1 - u, using
tau^{nu/2} + tau^{-nu/2} - (tau^{nu/2-1} + tau^{1-nu/2}) = p q and
tau + 1/tau - 2 = p^2 with p = tau^{1/2} - tau^{-1/2},
q = tau^{(nu-1)/2} - tau^{-(nu-1)/2}. This avoids the cancellation near
x = y that the raw (r, s) form suffers. The raw form is kept as an oracle.

The verification routines are grid scans with recorded tolerances, not
certificates.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .mathcore import check_dimension, sphere_area

# r = s with 1 - u below this is treated as the excluded point x = y
SINGULAR_GAP = 1e-9
# the bound scan stops at u = 1 - U_STOP
U_STOP = 1e-6


def kernel_K(nu, x_radius: float) -> float:
    """Magnitude of grad Phi at |x| = x_radius; the vector points to the origin."""
    nu = check_dimension(nu)
    if not x_radius > 0:
        raise ValueError(f"kernel is singular at the origin; got radius {x_radius!r}")
    return 1.0 / (sphere_area(nu) * x_radius ** (nu - 1))


def _v_tau(nu: int, tau, w):
    tau = np.asarray(tau, dtype=float)
    w = np.asarray(w, dtype=float)
    sq = np.sqrt(tau)
    p = sq - 1.0 / sq
    q = tau ** ((nu - 1) / 2.0) - tau ** (-(nu - 1) / 2.0)
    b = tau ** (nu / 2.0 - 1.0) + tau ** (1.0 - nu / 2.0)
    return (p * q + b * w) / (p * p + 2.0 * w) ** (nu / 2.0)


def V_tau(nu, tau, u):
    """V as a function of tau = r/s and u (vectorized, no admissibility checks)."""
    nu = check_dimension(nu)
    return _v_tau(nu, tau, 1.0 - np.asarray(u, dtype=float))


def V_rs(nu, r, s, u):
    """Raw (r, s, u) form of V; used only as a cross-check."""
    nu = check_dimension(nu)
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    num = r**nu - (r ** (nu - 1) * s + r * s ** (nu - 1)) * u + s**nu
    return num / (r * r + s * s - 2.0 * r * s * u) ** (nu / 2.0)


@dataclass(frozen=True)
class KernelPoint:
    r: float
    s: float
    u: float
    nu: int

    def __post_init__(self):
        object.__setattr__(self, "nu", check_dimension(self.nu))
        if not (self.r > 0 and self.s > 0):
            raise ValueError(f"radii must be positive, got r={self.r!r}, s={self.s!r}")
        if not -1.0 <= self.u <= 1.0:
            raise ValueError(f"cosine must lie in [-1, 1], got {self.u!r}")
        if self.r == self.s and 1.0 - self.u < SINGULAR_GAP:
            raise ValueError("V is undefined at x = y (r = s, u = 1)")


def V(point: KernelPoint) -> float:
    return float(V_tau(point.nu, point.r / point.s, point.u))


def f(nu, tau: float) -> float:
    """(1 + tau^{nu-1}) / (1 + tau)^{nu-1} on [0, 1]."""
    nu = check_dimension(nu)
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0) or np.any(tau_arr > 1):
        raise ValueError("f is defined on 0 <= tau <= 1")
    out = _f(nu, tau_arr)
    return float(out) if out.ndim == 0 else out


def _f(nu, tau):
    return (1.0 + tau ** (nu - 1)) / (1.0 + tau) ** (nu - 1)


def f_prime(nu, tau):
    """Closed-form derivative (nu-1)(tau^{nu-2} - 1)/(1 + tau)^nu."""
    nu = check_dimension(nu)
    tau = np.asarray(tau, dtype=float)
    return (nu - 1) * (tau ** (nu - 2) - 1.0) / (1.0 + tau) ** nu


def kernel_bound(nu) -> float:
    """f(1) = 2^{2-nu}."""
    return 2.0 ** (2 - check_dimension(nu))


@dataclass
class FDecreasingReport:
    nu: int
    n_samples: int
    max_f_prime: float
    nonpositive: bool
    zero_only_at_one: bool
    max_fd_error: float
    fd_rtol: float
    fd_atol: float
    fd_step: float

    @property
    def ok(self) -> bool:
        return self.nonpositive and self.zero_only_at_one and self.max_fd_error <= 1.0


def verify_f_decreasing(nu, n_samples: int, *, fd_step: float = 1e-3,
                        fd_rtol: float = 1e-6, fd_atol: float = 1e-12) -> FDecreasingReport:
    """Check f' <= 0 on (0, 1] and compare f' with centered differences of f.

    The difference quotient is the five-point centered stencil; it reaches
    slightly outside [0, 1], where the rational expression for f is smooth.
    ``max_fd_error`` is the worst |fd - f'| / (rtol |f'| + atol), so <= 1 passes.
    """
    nu = check_dimension(nu)
    if n_samples < 2:
        raise ValueError("need at least two samples")
    tau = np.arange(1, n_samples + 1, dtype=float) / n_samples
    fp = f_prime(nu, tau)
    nonpositive = bool(np.all(fp <= 0.0))
    interior = tau < 1.0
    if nu == 2:
        zero_ok = bool(np.all(fp == 0.0))
    else:
        zero_ok = bool(np.all(fp[interior] < 0.0) and fp[~interior][0] == 0.0)
    h = fd_step
    fd = (-_f(nu, tau + 2 * h) + 8 * _f(nu, tau + h) - 8 * _f(nu, tau - h) + _f(nu, tau - 2 * h)) / (12 * h)
    err = np.abs(fd - fp) / (fd_rtol * np.abs(fp) + fd_atol)
    return FDecreasingReport(nu, n_samples, float(fp.max()), nonpositive, zero_ok,
                             float(err.max()), fd_rtol, fd_atol, h)


@dataclass
class MonotoneReport:
    nu: int
    n_tau: int
    n_u: int
    slack: float
    violations: list = field(default_factory=list)  # (tau, u_k, u_{k+1}) triples

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_u_monotone(nu, tau_grid, u_grid, *, slack: float = 1e-10) -> MonotoneReport:
    """Check u -> V(tau, 1, u) is nondecreasing along ``u_grid`` for each tau.

    Successive values may drop by at most ``slack * max(1, |V|)``.
    """
    nu = check_dimension(nu)
    tau_grid = np.asarray(tau_grid, dtype=float).ravel()
    u_grid = np.asarray(u_grid, dtype=float).ravel()
    if tau_grid.size == 0 or u_grid.size == 0:
        raise ValueError("tau and u grids must be nonempty")
    if np.any(tau_grid <= 0) or np.any(tau_grid > 1):
        raise ValueError("tau grid must lie in (0, 1]")
    if np.any(u_grid < -1) or np.any(u_grid >= 1):
        raise ValueError("u grid must lie in [-1, 1)")
    u_sorted = np.sort(u_grid)
    vals = V_tau(nu, tau_grid[:, None], u_sorted[None, :])
    drop = vals[:, :-1] - vals[:, 1:]
    bad = drop > slack * np.maximum(1.0, np.abs(vals[:, :-1]))
    report = MonotoneReport(nu, tau_grid.size, u_grid.size, slack)
    for i, k in zip(*np.nonzero(bad)):
        report.violations.append((float(tau_grid[i]), float(u_sorted[k]), float(u_sorted[k + 1])))
    return report


@dataclass
class BoundReport:
    nu: int
    min_value: float
    argmin: tuple
    bound: float
    tol: float
    violated: bool
    n_tau: int
    n_u: int
    u_stop: float
    row_tau: np.ndarray = field(repr=False)
    row_min: np.ndarray = field(repr=False)
    row_argmin_u: np.ndarray = field(repr=False)

    @property
    def grid_spec(self) -> str:
        return (f"tau=k/{self.n_tau} (k=1..{self.n_tau}), u=linspace(-1, 1-{self.u_stop:g}, {self.n_u}), "
                f"tol={self.tol:g}")

    def summary(self) -> str:
        return (f"nu={self.nu} min={self.min_value:.17g} argmin=(tau={self.argmin[0]:.17g}, "
                f"u={self.argmin[1]:.17g}) bound={self.bound:.17g} violated={self.violated} "
                f"grid: {self.grid_spec}")

    def rows_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.summary()}\n")
        buf.write("tau,min_over_u,argmin_u\n")
        for t, m, a in zip(self.row_tau, self.row_min, self.row_argmin_u):
            buf.write(f"{t:.17g},{m:.17g},{a:.17g}\n")
        return buf.getvalue()


def verify_kernel_bound(nu, n_tau: int, n_u: int, *, tol: float = 1e-10,
                        bound_scale: float = 1.0) -> BoundReport:
    """Scan V over (0, 1] x [-1, 1 - U_STOP] and compare its minimum with 2^{2-nu}.

    tau <= 1 suffices since V(r, s, u) = V(s, r, u). Ties in the minimum are
    broken by smallest tau, then smallest u. ``bound_scale`` multiplies the
    reference bound (a hook for exercising the failure path).
    """
    nu = check_dimension(nu)
    if n_tau < 2 or n_u < 2:
        raise ValueError("grid sizes must be >= 2")
    tau = np.arange(1, n_tau + 1, dtype=float) / n_tau
    u = np.linspace(-1.0, 1.0 - U_STOP, n_u)
    vals = V_tau(nu, tau[:, None], u[None, :])
    # argmin returns the first occurrence, i.e. the smallest u in each row
    row_arg = np.argmin(vals, axis=1)
    row_min = vals[np.arange(n_tau), row_arg]
    best_row = int(np.argmin(row_min))
    min_value = float(row_min[best_row])
    bound = kernel_bound(nu) * bound_scale
    return BoundReport(
        nu=nu,
        min_value=min_value,
        argmin=(float(tau[best_row]), float(u[row_arg[best_row]])),
        bound=bound,
        tol=tol,
        violated=bool(min_value < bound - tol),
        n_tau=n_tau,
        n_u=n_u,
        u_stop=U_STOP,
        row_tau=tau,
        row_min=row_min,
        row_argmin_u=u[row_arg],
    )
