"""System description, energy bookkeeping and closed-form estimators.

Everything is in trap units: lengths in ``l0 = (1/(m Omega))^(1/2)``,
energies in ``hbar Omega`` and frequencies in ``Omega``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError


class SpinPolicy(str, enum.Enum):
    POLARIZED_1D = "polarized-1d"
    HUND_2D = "hund-2d"


class Engine(str, enum.Enum):
    TWO_BODY_EXACT = "two-body-exact"
    HARTREE_FOCK = "hartree-fock"
    THOMAS_FERMI = "thomas-fermi"
    CLASSICAL = "classical"


@dataclass(frozen=True)
class SystemSpec:
    """Trapped system: ``H = T + gamma V + W`` with ``W = lambda sum 1/r_ij^alpha``."""

    dimension: int
    particles: int
    alpha: int = 1
    lam: float = 0.0
    kappa: Optional[float] = None
    trap_scale: float = 1.0
    spin_policy: Optional[SpinPolicy] = None

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.particles < 1:
            raise DomainError("need at least one particle")
        if self.alpha not in (1, 3):
            raise DomainError(f"interaction exponent must be 1 or 3, got {self.alpha}")
        if not self.lam >= 0:
            raise DomainError("coupling must be non-negative")
        if not self.trap_scale > 0:
            raise DomainError("trap scale must be positive")
        policy = SpinPolicy.POLARIZED_1D if self.dimension == 1 else SpinPolicy.HUND_2D
        if self.spin_policy is None:
            object.__setattr__(self, "spin_policy", policy)
        elif SpinPolicy(self.spin_policy) != policy:
            raise DomainError(f"d={self.dimension} requires spin policy {policy.value}")
        else:
            object.__setattr__(self, "spin_policy", SpinPolicy(self.spin_policy))
        kappa = self.kappa
        if self.dimension == 2:
            if kappa not in (None, 0, 0.0):
                raise DomainError("no regularisation in 2D (kappa must be 0)")
            kappa = 0.0
        elif kappa is None:
            kappa = 0.1 if self.alpha == 1 else 0.0
        if kappa < 0:
            raise DomainError("kappa must be non-negative")
        if self.dimension == 1 and self.alpha == 1 and kappa <= 0:
            raise DomainError("1D Coulomb needs a positive regularisation kappa")
        object.__setattr__(self, "kappa", float(kappa))

    def with_gamma(self, gamma: float) -> "SystemSpec":
        return SystemSpec(self.dimension, self.particles, self.alpha, self.lam,
                          self.kappa, gamma, self.spin_policy)

    def with_lambda(self, lam: float) -> "SystemSpec":
        return SystemSpec(self.dimension, self.particles, self.alpha, lam,
                          self.kappa, self.trap_scale, self.spin_policy)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Ground-state expectation values.

    ``trap`` is the unscaled ``<V>`` = ``<sum r_i^2 / 2>``; the total energy
    of a state of ``T + gamma V + W`` is ``kinetic + gamma*trap + interaction``.
    """

    kinetic: float
    trap: float
    interaction: float
    gamma: float = 1.0

    @property
    def total(self) -> float:
        return self.kinetic + self.gamma * self.trap + self.interaction

    def as_dict(self) -> dict:
        return {"kinetic": self.kinetic, "trap": self.trap,
                "interaction": self.interaction, "total": self.total}


@dataclass
class GroundStateResult:
    energies: EnergyBreakdown
    r2: float
    engine: Engine
    r2_dgamma: Optional[float] = None
    r2_dgamma_error: Optional[float] = None
    density: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.r2 > 0:
            raise DomainError("<r^2> must be positive")
        if self.r2_dgamma is not None and not self.r2_dgamma < 0:
            raise DomainError("d<r^2>/dgamma must be negative")


def frequency_window(alpha: int) -> tuple[float, float]:
    """Admissible range of the relative breathing frequency."""
    if alpha == 1:
        return math.sqrt(3.0), 2.0
    if alpha == 3:
        return 2.0, math.sqrt(5.0)
    raise DomainError(f"unsupported interaction exponent {alpha}")


def virial_residual(e: EnergyBreakdown, alpha: int) -> float:
    """``|2T - 2V + alpha W| / max(E, 1)`` for a pure power-law interaction."""
    return abs(2 * e.kinetic - 2 * e.gamma * e.trap + alpha * e.interaction) / max(e.total, 1.0)


def sigma_ideal(d: int, n: int) -> float:
    if n < 1:
        raise DomainError("need at least one particle")
    if d == 1:
        return n / math.sqrt(2.0)
    if d == 2:
        return math.sqrt(2.0 / 3.0) * n**0.75
    raise DomainError(f"unsupported dimension {d}")


def localization_chi(d: int, n: int, e: EnergyBreakdown) -> float:
    """Ratio of the ideal to the actual cloud extension ``sqrt(2 <V>)``."""
    if not e.trap > 0:
        raise DomainError("trap energy must be positive")
    return sigma_ideal(d, n) / math.sqrt(2.0 * e.trap)


def ideal_energy(d: int, n: int) -> float:
    if n < 1:
        raise DomainError("need at least one particle")
    if d == 1:
        return 0.5 * n**2
    if d == 2:
        return (2.0 / 3.0) * n**1.5
    raise DomainError(f"unsupported dimension {d}")


# 2D Thomas-Fermi parabolic-profile coefficients (see tf.tf2d_energy)
TF2D_INTERACTION = 512.0 * math.sqrt(2.0) / (315.0 * math.pi)


def _classical_constant_2d() -> float:
    # minimum over the profile width of (1/3) g^(1/2) + c g^(-1/4); the
    # stationary point is g^(3/4) = 3c/2 = 256 sqrt2 / (105 pi)
    c = TF2D_INTERACTION
    g34 = 256.0 * math.sqrt(2.0) / (105.0 * math.pi)
    return g34 ** (2.0 / 3.0) / 3.0 + c * g34 ** (-1.0 / 3.0)


CLASSICAL_CONSTANT_2D = _classical_constant_2d()


def classical_energy_estimate(d: int, n: int, lam: float) -> float:
    """Strong-coupling (kinetic-free) energy scaling law."""
    if not lam > 0:
        raise DomainError("coupling must be positive")
    if d == 2:
        if n < 1:
            raise DomainError("need at least one particle")
        return CLASSICAL_CONSTANT_2D * lam ** (2.0 / 3.0) * n ** (5.0 / 3.0)
    if d == 1:
        if n < 2:
            raise DomainError("1D estimate needs N >= 2 (ln N > 0)")
        return 0.3 * (3.0 * lam * n * math.log(n)) ** (2.0 / 3.0) * n
    raise DomainError(f"unsupported dimension {d}")


def lambda_tilde(d: int, n) -> float | np.ndarray:
    """Coupling at which the ideal and classical energy estimates coincide."""
    n_arr = np.asarray(n, dtype=float)
    if d == 2:
        if np.any(n_arr < 1):
            raise DomainError("need at least one particle")
        out = (2.0 / (3.0 * CLASSICAL_CONSTANT_2D)) ** 1.5 * n_arr**-0.25
    elif d == 1:
        if np.any(n_arr < 2):
            raise DomainError("1D estimate needs N >= 2")
        out = (5.0 / 3.0) ** 1.5 / 3.0 * np.sqrt(n_arr) / np.log(n_arr)
    else:
        raise DomainError(f"unsupported dimension {d}")
    return float(out) if np.ndim(out) == 0 else out
