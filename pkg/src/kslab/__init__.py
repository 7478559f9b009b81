"""Numerical lab for the radial Patlak-Keller-Segel system with a point source.

Set ``KSLAB_NO_NUMBA=1`` before import to run the pure-numpy kernels.
"""

from ._accel import backend_name
from .criterion import (Prediction, Verdict, blowup_rhs, critical_mass_2d, criterion_lhs,
                        evaluate_criterion, implied_m2_bound)
from .diagnostics import (InequalityReport, MomentRecord, QuadratureError, hoelder_rhs,
                          interaction_integral, moment_derivative_exact, monitor_trajectory)
from .kernel import (KernelPoint, V, V_rs, V_tau, f, f_prime, kernel_bound, kernel_K,
                     verify_f_decreasing, verify_kernel_bound, verify_u_monotone)
from .mathcore import (RadialDensity, gamma_half_integer, interpolation_residual, moment,
                       moments, sphere_area, unit_sphere_area)
from .solver import (Gaussian, Ring, SimulationOutcome, SolverConfig, Status, StepCollapse,
                     UniformBall, cumulative_mass, drift_velocity, init_profile, run, step)

__version__ = "0.1.0"

__all__ = [
    "backend_name", "Prediction", "Verdict", "blowup_rhs", "critical_mass_2d", "criterion_lhs",
    "evaluate_criterion", "implied_m2_bound", "InequalityReport", "MomentRecord",
    "QuadratureError", "hoelder_rhs", "interaction_integral", "moment_derivative_exact",
    "monitor_trajectory", "KernelPoint", "V", "V_rs", "V_tau", "f", "f_prime", "kernel_bound",
    "kernel_K", "verify_f_decreasing", "verify_kernel_bound", "verify_u_monotone",
    "RadialDensity", "gamma_half_integer", "interpolation_residual", "moment", "moments",
    "sphere_area", "unit_sphere_area", "Gaussian", "Ring", "SimulationOutcome", "SolverConfig",
    "Status", "StepCollapse", "UniformBall", "cumulative_mass", "drift_velocity", "init_profile",
    "run", "step",
]
