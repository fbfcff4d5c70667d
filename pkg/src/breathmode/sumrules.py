"""Energy-weighted moments of the monopole operator and frequency estimators.

The moments ``m_k = sum_i (E_i - E_0)^k |<0|r^2|i>|^2`` are obtained either
from ground-state expectation values (``m1``, ``m3``, and ``m_-1`` through
the response of ``<r^2>`` to a trap rescaling ``gamma``) or directly from a
spectrum.  The centre-of-mass monopole contributes exactly ``2^(k-1) d`` to
every moment; subtracting it gives the corrected moments whose ratios bound
the relative breathing frequency from above.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import DegenerateSystemError, DomainError, UnavailableError
from .model import Engine, EnergyBreakdown, GroundStateResult, SystemSpec

MIN_GAP = 1e-12


class Variant(str, enum.Enum):
    CONVENTIONAL = "conventional"
    IMPROVED = "improved"


@dataclass(frozen=True)
class MomentSet:
    m1: float
    m3: float
    m_minus1: Optional[float]
    dimension: int
    corrected: bool = False

    def get(self, k: int) -> float:
        value = {1: self.m1, 3: self.m3, -1: self.m_minus1}.get(k)
        if value is None:
            raise UnavailableError(f"moment m_{k} not available")
        return value


@dataclass(frozen=True)
class FrequencyEstimate:
    sr31: float
    sr1m1: Optional[float]
    variant: Variant
    engine: Optional[Engine] = None


def cm_moment(k: int, d: int) -> float:
    """Centre-of-mass monopole contribution ``2^(k-1) d`` to ``m_k``."""
    return 2.0 ** (k - 1) * d


def moments_from_ground_state(gs: GroundStateResult, spec: SystemSpec) -> MomentSet:
    e = gs.energies
    m3 = 8 * e.kinetic + 8 * e.trap + 2 * spec.alpha**2 * e.interaction
    m_minus1 = None if gs.r2_dgamma is None else -gs.r2_dgamma
    return MomentSet(2 * gs.r2, m3, m_minus1, spec.dimension)


def correct_moments(ms: MomentSet, d: Optional[int] = None) -> MomentSet:
    """Subtract the analytic centre-of-mass part from every moment."""
    if ms.corrected:
        raise DomainError("moments are already corrected")
    d = ms.dimension if d is None else d
    m1 = ms.m1 - cm_moment(1, d)
    m3 = ms.m3 - cm_moment(3, d)
    mm1 = None if ms.m_minus1 is None else ms.m_minus1 - cm_moment(-1, d)
    for name, value in (("m1", m1), ("m3", m3), ("m_-1", mm1)):
        if value is not None and not value > 0:
            raise DegenerateSystemError(
                f"corrected {name} = {value:.3g} is not positive; "
                "the system is (nearly) pure centre-of-mass motion")
    return replace(ms, m1=m1, m3=m3, m_minus1=mm1, dimension=d, corrected=True)


def sr31_from_energies(e: EnergyBreakdown, alpha: int) -> float:
    """``sqrt(m3/m1)`` written through the kinetic-to-trap energy ratio."""
    if not e.trap > 0:
        raise DomainError("trap energy must be positive")
    return math.sqrt((2 + alpha) + (2 - alpha) * e.kinetic / e.trap)


def sr_ratio(ms: MomentSet, k: int, l: int) -> float:
    """Average excitation energy ``E_{k,l} = (m_k / m_{k-l})^(1/l)``.

    ``sr_ratio(ms, 3, 2)`` is sr(3,1) and ``sr_ratio(ms, 1, 2)`` is sr(1,-1).
    """
    if l < 1:
        raise DomainError("l must be a positive integer")
    num, den = ms.get(k), ms.get(k - l)
    if not (num > 0 and den > 0):
        raise UnavailableError(f"moments m_{k}, m_{k - l} must be positive")
    return (num / den) ** (1.0 / l)


def moments_from_spectrum(levels: Iterable, k: int) -> float:
    """Truncated moment sum over ``(excitation energy, <0|Q|i>)`` pairs."""
    arr = np.asarray(list(levels) if not isinstance(levels, np.ndarray) else levels,
                     dtype=float)
    if arr.size == 0:
        raise DomainError("empty spectrum")
    gaps, elements = arr[:, 0], arr[:, 1]
    if np.any(gaps < -MIN_GAP):
        raise DomainError("excitation energies must be non-negative")
    weights = elements**2
    if k < 0 and np.any((gaps < MIN_GAP) & (weights > 0)):
        raise DomainError(f"m_{k} diverges: level with vanishing gap and nonzero weight")
    live = weights > 0
    return float(np.sum(gaps[live] ** k * weights[live]))


def estimate_frequencies(gs: GroundStateResult, spec: SystemSpec,
                         improved: bool = True) -> FrequencyEstimate:
    """sr(3,1) and, when ``m_-1`` is known, sr(1,-1) for one ground state."""
    ms = moments_from_ground_state(gs, spec)
    if improved:
        ms = correct_moments(ms)
    sr31 = sr_ratio(ms, 3, 2)
    sr1m1 = sr_ratio(ms, 1, 2) if ms.m_minus1 is not None else None
    variant = Variant.IMPROVED if improved else Variant.CONVENTIONAL
    return FrequencyEstimate(sr31, sr1m1, variant, gs.engine)


def r2_gamma_derivative(solver: Callable[[SystemSpec], GroundStateResult],
                        spec: SystemSpec, epsilon: float = 1e-3,
                        richardson: bool = True) -> tuple[float, float]:
    """``d<r^2>/dgamma`` at ``gamma = 1`` by central differences.

    With ``richardson`` the step is halved and the two differences are
    combined; the returned error estimate is the spread between them.
    Without it the error estimate is ``nan``.
    """
    if not 1e-4 <= epsilon <= 1e-2:
        raise DomainError("epsilon must lie in [1e-4, 1e-2]")
    g0 = spec.trap_scale

    def central(eps):
        up = solver(spec.with_gamma(g0 + eps)).r2
        down = solver(spec.with_gamma(g0 - eps)).r2
        return (up - down) / (2 * eps)

    coarse = central(epsilon)
    if not richardson:
        return coarse, float("nan")
    fine = central(epsilon / 2)
    return (4 * fine - coarse) / 3, abs(fine - coarse)


def with_r2_derivative(solver: Callable[[SystemSpec], GroundStateResult],
                       spec: SystemSpec, epsilon: float = 1e-3,
                       richardson: bool = True) -> GroundStateResult:
    """Solve at ``spec`` and attach ``d<r^2>/dgamma``."""
    gs = solver(spec)
    deriv, err = r2_gamma_derivative(solver, spec, epsilon, richardson)
    gs.r2_dgamma = deriv
    gs.r2_dgamma_error = err
    if not deriv < 0:
        raise DomainError(f"d<r^2>/dgamma = {deriv:.3g} is not negative")
    return gs
