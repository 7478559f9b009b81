"""Command-line front end.

    kslab criterion      evaluate the blow-up criterion for the configured profile
    kslab simulate       run the solver once and write moment snapshots
    kslab sweep          scan mass (or Gaussian width) and bracket the blow-up threshold
    kslab verify-kernel  grid scans of the pair integrand and its lower bound
    kslab verify-moment  compare a simulated trajectory with the moment identity

Every command writes ``resolved.ini`` (all keys, defaults included) to the
output directory, so a run can be repeated exactly with ``--config``.
Verdicts and sweep outcomes are data and exit 0; failed verifications exit 1
and configuration errors exit 2.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .criterion import evaluate_criterion
from .diagnostics import QuadratureError, monitor_trajectory
from .kernel import verify_f_decreasing, verify_kernel_bound, verify_u_monotone
from .mathcore import moment
from .solver import Status, init_profile, run

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2

log = logging.getLogger("kslab")


def _g(x) -> str:
    if x is None:
        return "nan"
    return f"{x:.17g}"


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _initial_state(cfg: RunConfig, sigma: float | None = None, mass: float | None = None):
    try:
        scfg = cfg.solver_config()
        rho0 = init_profile(cfg.profile_family(sigma), cfg.mass if mass is None else mass, scfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return scfg, rho0


# criterion -------------------------------------------------------------------

def cmd_criterion(cfg: RunConfig, out: Path) -> int:
    _, rho0 = _initial_state(cfg)
    m0 = moment(rho0, 0.0)
    m_nu = moment(rho0, float(cfg.dim))
    verdict = evaluate_criterion(cfg.dim, cfg.Z, m0, m_nu)
    print(verdict.summary())
    _write(out, "criterion.csv",
           f"# family={cfg.family}\n"
           "nu,Z,m0,m_nu,lhs,rhs,margin,prediction\n"
           f"{cfg.dim},{_g(cfg.Z)},{_g(m0)},{_g(m_nu)},{_g(verdict.lhs)},{_g(verdict.rhs)},"
           f"{_g(verdict.margin)},{verdict.predicted.value}\n")
    return EXIT_OK


# simulate ----------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    scfg, rho0 = _initial_state(cfg)
    outcome = run(scfg, rho0)
    m0 = outcome.trajectory[0].m0
    drift = abs(outcome.final_state.total_mass() - m0) / m0
    head = (f"# {outcome.summary()}\n# rho_cap={_g(outcome.rho_cap)} steps={outcome.steps} "
            f"mass_rel_error={drift:.3e} clipped_mass={outcome.clipped_mass:.3e}\n")
    _write(out, "snapshots.csv", head + outcome.snapshot_csv())
    fs = outcome.final_state
    buf = io.StringIO()
    buf.write("r_left,r_right,rho\n")
    for a, b, v in zip(fs.faces[:-1], fs.faces[1:], fs.values):
        buf.write(f"{a:.17g},{b:.17g},{v:.17g}\n")
    _write(out, "final_state.csv", buf.getvalue())
    print(outcome.summary())
    return EXIT_OK


# sweep ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    phase: str
    value: float
    mass: float
    sigma: float
    prediction: str
    margin: float
    status: Status
    detected_time: float | None
    final_max_density: float
    mass_rel_error: float
    min_density: float
    clipped_mass: float
    steps: int

    @property
    def detected(self) -> bool:
        return self.status is not Status.COMPLETED

    def row(self, index: int) -> str:
        return ",".join([
            str(index), self.phase, _g(self.value), _g(self.mass), _g(self.sigma), self.prediction,
            _g(self.margin), self.status.value, _g(self.detected_time), _g(self.final_max_density),
            f"{self.mass_rel_error:.3e}", _g(self.min_density), f"{self.clipped_mass:.3e}",
            str(self.steps),
        ])


SWEEP_HEADER = ("index,phase,value,mass,sigma,prediction,margin,status,detected_time,"
                "final_max_density,mass_rel_error,min_density,clipped_mass,steps")


def sweep_point(cfg: RunConfig, value: float, phase: str = "grid") -> SweepPoint:
    """Run one sweep member; ``value`` is in units of ``cfg.sweep_scale``."""
    x = value * cfg.sweep_scale
    if cfg.sweep_parameter == "mass":
        mass, sigma = x, cfg.sigma
    else:
        mass, sigma = cfg.mass, x
    scfg, rho0 = _initial_state(cfg, sigma=sigma, mass=mass)
    m0 = moment(rho0, 0.0)
    verdict = evaluate_criterion(cfg.dim, cfg.Z, m0, moment(rho0, float(cfg.dim)))
    outcome = run(scfg, rho0)
    final = outcome.final_state
    return SweepPoint(
        phase=phase, value=value, mass=mass, sigma=sigma,
        prediction=verdict.predicted.value, margin=verdict.margin,
        status=outcome.status, detected_time=outcome.detected_time,
        final_max_density=outcome.final_max_density,
        mass_rel_error=abs(final.total_mass() - m0) / m0,
        min_density=float(final.values.min()), clipped_mass=outcome.clipped_mass,
        steps=outcome.steps,
    )


def _sweep_worker(args):
    return sweep_point(*args)


@dataclass
class SweepResult:
    points: list
    bracket: tuple | None
    transitions: list
    monotone: bool

    @property
    def predicted_but_undetected(self) -> list:
        return [p for p in self.points if p.prediction == "BlowUpPredicted" and not p.detected]


def classify(points, detect_high: bool = True) -> tuple:
    """Bracket, transitions and monotonicity of detection along the value axis.

    With ``detect_high`` (mass sweeps) detection is expected above the
    threshold; width sweeps expect it below. A transition against the
    expected direction, or more than one, makes the sweep non-monotone.
    The bracket then spans every expected transition.
    """
    pts = sorted(points, key=lambda p: p.value)
    expected = []
    against = []
    for a, b in zip(pts, pts[1:]):
        if a.detected == b.detected:
            continue
        (expected if b.detected == detect_high else against).append((a.value, b.value))
    monotone = not against and len(expected) <= 1
    bracket = (expected[0][0], expected[-1][1]) if expected else None
    return bracket, sorted(expected + against), monotone


def run_sweep(cfg: RunConfig, jobs: int = 1) -> SweepResult:
    if cfg.sweep_parameter == "sigma" and cfg.family != "gaussian":
        raise ConfigError("sweep.parameter = sigma requires profile.family = gaussian")
    detect_high = cfg.sweep_parameter == "mass"
    values = np.linspace(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_steps)
    args = [(cfg, float(v), "grid") for v in values]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_sweep_worker, args))
    else:
        points = [_sweep_worker(a) for a in args]
    bracket, transitions, monotone = classify(points, detect_high)
    if cfg.bisection and bracket is not None and monotone:
        lo, hi = bracket
        for _ in range(cfg.bisection_steps):
            mid = 0.5 * (lo + hi)
            p = sweep_point(cfg, mid, "bisect")
            points.append(p)
            if p.detected == detect_high:
                hi = mid
            else:
                lo = mid
        bracket, transitions, monotone = classify(points, detect_high)
    return SweepResult(points, bracket, transitions, monotone)


def sweep_csv(cfg: RunConfig, result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(f"# parameter={cfg.sweep_parameter} scale={_g(cfg.sweep_scale)} nu={cfg.dim} "
              f"Z={_g(cfg.Z)} family={cfg.family} n_cells={cfg.n_cells} R={_g(cfg.R)} "
              f"t_end={_g(cfg.t_end)}\n")
    if result.bracket is None:
        buf.write("# bracket=none\n")
    else:
        lo, hi = result.bracket
        buf.write(f"# bracket_value=[{_g(lo)}, {_g(hi)}] "
                  f"bracket_abs=[{_g(lo * cfg.sweep_scale)}, {_g(hi * cfg.sweep_scale)}]\n")
    buf.write(f"# monotone={str(result.monotone).lower()} transitions="
              + ";".join(f"({_g(a)},{_g(b)})" for a, b in result.transitions) + "\n")
    buf.write(f"# predicted_but_undetected={len(result.predicted_but_undetected)}\n")
    buf.write(SWEEP_HEADER + "\n")
    for i, p in enumerate(result.points):
        buf.write(p.row(i) + "\n")
    return buf.getvalue()


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    result = run_sweep(cfg, jobs)
    _write(out, "sweep.csv", sweep_csv(cfg, result))
    for p in result.points:
        t = "-" if p.detected_time is None else f"{p.detected_time:.6g}"
        print(f"{cfg.sweep_parameter}={p.value:.6g}x{cfg.sweep_scale:.6g} "
              f"{p.prediction:16s} {p.status.value:16s} t={t}")
    if result.bracket is None:
        print("no transition inside the sweep range")
    else:
        lo, hi = result.bracket
        print(f"bracket: [{lo:.6g}, {hi:.6g}] x {cfg.sweep_scale:.6g}")
    if not result.monotone:
        print("warning: non-monotone outcomes at " +
              ", ".join(f"({a:.6g}, {b:.6g})" for a, b in result.transitions))
    for p in result.predicted_but_undetected:
        print(f"warning: {cfg.sweep_parameter}={p.value:.6g} predicted blow-up but completed")
    return EXIT_OK


# verification ----------------------------------------------------------------------

F_SAMPLES = 10_000
MONOTONE_GRID = 128


def cmd_verify_kernel(cfg: RunConfig, out: Path) -> int:
    failed = False
    lines = ["nu,bound,min,argmin_tau,argmin_u,bound_ok,f_decreasing_ok,u_monotone_ok"]
    for nu in cfg.verify_dims:
        rep = verify_kernel_bound(nu, cfg.n_tau, cfg.n_u, tol=cfg.kernel_tol,
                                  bound_scale=cfg.bound_scale)
        fdec = verify_f_decreasing(nu, F_SAMPLES)
        tau = np.arange(1, MONOTONE_GRID + 1) / MONOTONE_GRID
        mono = verify_u_monotone(nu, tau, np.linspace(-1.0, 1.0 - 1e-6, MONOTONE_GRID))
        _write(out, f"kernel_bound_nu{nu}.csv", rep.rows_csv())
        ok = not rep.violated and fdec.ok and mono.ok
        failed |= not ok
        lines.append(f"{nu},{_g(rep.bound)},{_g(rep.min_value)},{_g(rep.argmin[0])},"
                     f"{_g(rep.argmin[1])},{int(not rep.violated)},{int(fdec.ok)},{int(mono.ok)}")
        print(("ok   " if ok else "FAIL ") + rep.summary())
        if not fdec.ok:
            print(f"     f' check failed: max f'={fdec.max_f_prime:.3g} fd_error={fdec.max_fd_error:.3g}")
        if not mono.ok:
            print(f"     u-monotonicity failed at {len(mono.violations)} grid pairs")
    _write(out, "kernel_summary.csv", "\n".join(lines) + "\n")
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_verify_moment(cfg: RunConfig, out: Path) -> int:
    scfg, rho0 = _initial_state(cfg)
    outcome = run(scfg, rho0, keep_states=True)
    _write(out, "snapshots.csv", f"# {outcome.summary()}\n" + outcome.snapshot_csv())
    if len(outcome.states) < 3:
        print(f"error: only {len(outcome.states)} snapshots; reduce solver.snapshot_every",
              file=sys.stderr)
        return EXIT_VIOLATION
    try:
        report = monitor_trajectory(outcome.states, cfg.Z, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                                    detected=outcome.status is not Status.COMPLETED)
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    _write(out, "inequality.csv", report.csv())
    print(outcome.summary())
    print(("ok   " if report.ok else "FAIL ") + report.summary())
    return EXIT_OK if report.ok else EXIT_VIOLATION


# entry point -----------------------------------------------------------------------

COMMANDS = {
    "criterion": cmd_criterion,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify-kernel": cmd_verify_kernel,
    "verify-moment": cmd_verify_moment,
}


HELP = {
    "criterion": "evaluate the blow-up criterion for the configured profile",
    "simulate": "run the solver once and write moment snapshots",
    "sweep": "scan mass or Gaussian width and bracket the blow-up threshold",
    "verify-kernel": "grid scans of the pair integrand and its lower bound",
    "verify-moment": "compare a simulated trajectory with the moment identity",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with [section] key = value pairs")
    common.add_argument("--out", type=Path, default=Path("kslab-out"),
                        help="output directory (default: kslab-out)")
    common.add_argument("--jobs", type=int, default=1, help="parallel sweep runs (default: 1)")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override one config key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser = argparse.ArgumentParser(prog="kslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.overrides)
        args.out.mkdir(parents=True, exist_ok=True)
        _write(args.out, "resolved.ini", cfg.to_ini())
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out, args.jobs)
        return COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
