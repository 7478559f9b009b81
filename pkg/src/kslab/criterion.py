"""Moment blow-up criterion for the radial/whole-space PKS system with a point source.

The initial datum is predicted to blow up when

    M_nu^{(nu-2)/nu} < M_0^{2-2/nu} / ((nu-1) 2^nu |S^{nu-1}|)
                       - Z M_0^{1-2/nu} / (2 (nu-1) |S^{nu-1}|).

In two dimensions the left side is identically 1 and the condition reads
1 + Z/(4 pi) < M_0/(8 pi). A verdict that is not ``BLOW_UP_PREDICTED`` only
means the criterion is silent; it never certifies global existence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .mathcore import check_dimension, sphere_area


class Prediction(str, enum.Enum):
    BLOW_UP_PREDICTED = "BlowUpPredicted"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    predicted: Prediction
    lhs: float
    rhs: float
    margin: float
    nu: int
    Z: float
    m0: float
    m_nu: float

    @property
    def blow_up(self) -> bool:
        return self.predicted is Prediction.BLOW_UP_PREDICTED

    def summary(self) -> str:
        return (
            f"{self.predicted.value}, margin={self.margin:.10g} "
            f"(lhs={self.lhs:.10g}, rhs={self.rhs:.10g}; nu={self.nu}, Z={self.Z:.10g}, "
            f"M0={self.m0:.10g}, M_nu={self.m_nu:.10g})"
        )


def _check_finite(name, x):
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")


def blowup_rhs(nu, Z: float, m0: float) -> float:
    """Right-hand side of the criterion; negative for strongly repulsive Z."""
    nu = check_dimension(nu)
    _check_finite("Z", Z)
    if not m0 > 0:
        raise ValueError(f"total mass must be positive, got {m0!r}")
    area = sphere_area(nu)
    aggregation = m0 ** (2.0 - 2.0 / nu) / ((nu - 1) * 2.0**nu * area)
    source = Z * m0 ** (1.0 - 2.0 / nu) / (2.0 * (nu - 1) * area)
    return aggregation - source


def criterion_lhs(nu: int, m_nu: float) -> float:
    # nu = 2 is the exact convention M_nu^0 = 1; M_nu = 0 with nu > 2 gives 0
    if nu == 2:
        return 1.0
    if m_nu == 0.0:
        return 0.0
    return m_nu ** ((nu - 2) / nu)


def evaluate_criterion(nu, Z: float, m0: float, m_nu: float) -> Verdict:
    nu = check_dimension(nu)
    if not m0 > 0:
        raise ValueError(f"total mass must be positive, got {m0!r}")
    if not m_nu >= 0:
        raise ValueError(f"M_nu must be nonnegative, got {m_nu!r}")
    lhs = criterion_lhs(nu, m_nu)
    rhs = blowup_rhs(nu, Z, m0)
    margin = rhs - lhs
    # strict inequality: margin == 0 stays inconclusive
    predicted = Prediction.BLOW_UP_PREDICTED if lhs < rhs else Prediction.INCONCLUSIVE
    return Verdict(predicted, lhs, rhs, margin, nu, float(Z), float(m0), float(m_nu))


def implied_m2_bound(nu, Z: float, m0: float) -> float:
    """Explicit second-moment bound implied by the criterion for nu > 2.

    Any datum satisfying the criterion has
    M_2 <= M_0^{(nu-2)/nu} M_nu^{2/nu} < M_0^{(nu-2)/nu} rhs^{2/(nu-2)}.
    """
    nu = check_dimension(nu)
    if nu == 2:
        raise ValueError("the second-moment bound is empty in dimension two")
    rhs = blowup_rhs(nu, Z, m0)
    if rhs <= 0:
        raise ValueError(f"criterion right-hand side is {rhs:.6g} <= 0; the bound is vacuous")
    return m0 ** ((nu - 2) / nu) * rhs ** (2.0 / (nu - 2))


def critical_mass_2d(Z: float) -> float:
    """Two-dimensional threshold 8 pi (1 + Z/(4 pi)) = 8 pi + 2 Z."""
    return 8.0 * math.pi * (1.0 + Z / (4.0 * math.pi))
