"""Special-function values, radial densities and their moments.

Everything here works for integer dimension ``nu >= 2``. Densities are
cell averages on a radial grid (finite-volume semantics), and moments are
integrated exactly cell by cell, so refining a piecewise-constant profile
leaves its moments unchanged up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def check_dimension(nu) -> int:
    """Validate a spatial dimension and return it as ``int``."""
    if isinstance(nu, bool) or int(nu) != nu:
        raise ValueError(f"dimension must be an integer, got {nu!r}")
    nu = int(nu)
    if nu < 2:
        raise ValueError(f"dimension must be >= 2, got {nu}")
    return nu


def gamma_half_integer(two_k: int) -> float:
    """Gamma(two_k / 2) for a positive integer ``two_k``.

    Built from Gamma(1) = 1 and Gamma(1/2) = sqrt(pi) with the recurrence
    Gamma(x + 1) = x Gamma(x).
    """
    if isinstance(two_k, bool) or int(two_k) != two_k:
        raise ValueError(f"two_k must be an integer, got {two_k!r}")
    two_k = int(two_k)
    if two_k <= 0:
        raise ValueError(f"two_k must be positive, got {two_k}")
    if two_k % 2 == 0:
        x, value = 1.0, 1.0
    else:
        x, value = 0.5, math.sqrt(math.pi)
    while 2.0 * x < two_k:
        value *= x
        x += 1.0
    return value


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n, n >= 1 (|S^0| = 2)."""
    if int(n) != n or n < 1:
        raise ValueError(f"ambient dimension must be a positive integer, got {n!r}")
    return 2.0 * math.pi ** (n / 2.0) / gamma_half_integer(int(n))


def sphere_area(nu) -> float:
    """|S^{nu-1}|, the area of the unit sphere bounding the nu-ball."""
    return unit_sphere_area(check_dimension(nu))


def _power_increments(faces: np.ndarray, p: float) -> np.ndarray:
    # r_{i+1}^p - r_i^p; p > 0 so 0^p is well defined
    fp = faces**p
    return fp[1:] - fp[:-1]


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Cell-averaged radial density rho(|x|) on faces 0 = r_0 < ... < r_N.

    ``values[i]`` is the average of rho over the shell r_i < |x| < r_{i+1}.
    Arrays are copied and made read-only on construction.
    """

    faces: np.ndarray
    values: np.ndarray
    nu: int

    def __post_init__(self):
        nu = check_dimension(self.nu)
        faces = np.array(self.faces, dtype=float)
        values = np.array(self.values, dtype=float)
        if faces.ndim != 1 or faces.size < 2:
            raise ValueError("faces must be a 1-D array with at least two entries")
        if values.shape != (faces.size - 1,):
            raise ValueError(
                f"values has shape {values.shape}, expected ({faces.size - 1},)"
            )
        if faces[0] != 0.0:
            raise ValueError(f"first face must be exactly 0, got {faces[0]!r}")
        if not np.all(np.diff(faces) > 0):
            raise ValueError("faces must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        if np.any(values < 0):
            raise ValueError("density values must be nonnegative")
        faces.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "nu", nu)

    @property
    def n_cells(self) -> int:
        return self.values.size

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.faces[1:] + self.faces[:-1])

    def cell_volumes(self) -> np.ndarray:
        return sphere_area(self.nu) * _power_increments(self.faces, self.nu) / self.nu

    def cell_masses(self) -> np.ndarray:
        return self.values * self.cell_volumes()

    def total_mass(self) -> float:
        return moment(self, 0.0)

    def with_values(self, values) -> "RadialDensity":
        return RadialDensity(self.faces, values, self.nu)

    def scaled(self, c: float) -> "RadialDensity":
        return RadialDensity(self.faces, c * self.values, self.nu)


def moment(rho: RadialDensity, mu: float) -> float:
    """M_mu = int |x|^mu rho(x) dx with exact per-cell power-rule integrals."""
    if not mu >= 0:
        raise ValueError(f"moment order must be >= 0, got {mu!r}")
    p = mu + rho.nu
    cell = _power_increments(rho.faces, p) / p
    return float(sphere_area(rho.nu) * np.dot(rho.values, cell))


def moments(rho: RadialDensity, orders) -> np.ndarray:
    return np.array([moment(rho, mu) for mu in orders])


def interpolation_residual(rho: RadialDensity) -> float:
    """M_0^{(nu-2)/nu} M_nu^{2/nu} - M_2, nonnegative by Hoelder's inequality."""
    nu = rho.nu
    m2 = moment(rho, 2.0)
    if nu == 2:
        return m2 - m2
    m0 = moment(rho, 0.0)
    mnu = moment(rho, float(nu))
    return m0 ** ((nu - 2) / nu) * mnu ** (2.0 / nu) - m2


def refine(rho: RadialDensity, factor: int = 2) -> RadialDensity:
    """Split every cell into ``factor`` equal-width cells with the same value."""
    factor = int(factor)
    if factor < 1:
        raise ValueError("refinement factor must be >= 1")
    f = rho.faces
    sub = (f[:-1, None] + (f[1:] - f[:-1])[:, None] * np.arange(factor)[None, :] / factor).ravel()
    faces = np.append(sub, f[-1])
    return RadialDensity(faces, np.repeat(rho.values, factor), rho.nu)
