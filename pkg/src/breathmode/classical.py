"""Classical ground states of trapped Coulomb clusters.

Minimises ``E = sum_i r_i^2 / 2 + lam sum_{i<j} 1/r_ij`` from random starts
with L-BFGS, then polishes each local minimum with Newton steps on the
exact Hessian.  These configurations are the strong-coupling reference.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import ConvergenceError, DomainError
from .model import EnergyBreakdown, Engine, GroundStateResult
from .sumrules import sr31_from_energies

GRADIENT_TOL = 1e-8
METASTABLE_TOL = 1e-6
VIRIAL_TOL = 1e-6
NEWTON_STEPS = 20


@dataclass
class ClassicalConfiguration:
    positions: np.ndarray  # (N, d)
    energy: float
    gradient_norm: float
    restarts_used: int
    lam: float
    trap: float
    interaction: float
    metastable: bool = False
    restart_energies: np.ndarray = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    @property
    def particles(self) -> int:
        return self.positions.shape[0]

    @property
    def energies(self) -> EnergyBreakdown:
        return EnergyBreakdown(0.0, self.trap, self.interaction)

    def virial_residual(self) -> float:
        """``|2V - W| / E``, zero at any stationary point."""
        return abs(2 * self.trap - self.interaction) / abs(self.energy)

    def to_ground_state(self) -> GroundStateResult:
        return GroundStateResult(self.energies, 2 * self.trap, Engine.CLASSICAL,
                                 meta={"configuration": self})

    def dump_csv(self, path) -> None:
        """Rows ``index, x[, y]``."""
        cols = ["index", "x", "y"][: self.dimension + 1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for i, p in enumerate(self.positions):
                w.writerow([i, *(repr(float(v)) for v in p)])


def _objective(x: np.ndarray, n: int, d: int, lam: float):
    trap, inter, grad = kernels.energy_gradient(x.reshape(n, d), lam)
    return trap + inter, grad.ravel()


def _polish(pos: np.ndarray, lam: float) -> np.ndarray:
    """Newton iterations; the pseudo-inverse handles the rotation zero mode."""
    n, d = pos.shape
    for _ in range(NEWTON_STEPS):
        trap, inter, grad = kernels.energy_gradient(pos, lam)
        if np.linalg.norm(grad) <= GRADIENT_TOL * max(1.0, trap + inter):
            break
        step = np.linalg.lstsq(kernels.hessian(pos, lam), -grad.ravel(), rcond=1e-12)[0]
        trial = pos + step.reshape(n, d)
        t2, i2, _ = kernels.energy_gradient(trial, lam)
        # accept unless the step clearly went uphill (then fall back to a gradient step)
        if t2 + i2 > trap + inter + 1e-12 * abs(trap + inter):
            trial = pos - 0.1 * grad
        pos = trial
    return pos - pos.mean(axis=0)


def initial_radius(n: int, lam: float) -> float:
    """Starting-cloud radius: two-body separation times ``N^(1/3)``."""
    return (2.0 * lam) ** (1.0 / 3.0) * n ** (1.0 / 3.0)


def _random_start(rng: np.random.Generator, n: int, d: int, lam: float) -> np.ndarray:
    radius = initial_radius(n, lam)
    if d == 1:
        return np.sort(rng.uniform(-radius, radius, (n, 1)), axis=0)
    r = radius * np.sqrt(rng.uniform(size=n))
    phi = rng.uniform(0, 2 * math.pi, size=n)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi)))


def _single_restart(args) -> tuple[float, np.ndarray]:
    seed_seq, n, d, lam = args
    rng = np.random.default_rng(seed_seq)
    x0 = _random_start(rng, n, d, lam).ravel()
    res = minimize(_objective, x0, args=(n, d, lam), jac=True, method="L-BFGS-B",
                   options={"gtol": 1e-10, "ftol": 1e-15, "maxiter": 20000})
    pos = _polish(res.x.reshape(n, d), lam)
    trap, inter, _ = kernels.energy_gradient(pos, lam)
    return trap + inter, pos


def default_restarts(n: int) -> int:
    return 25 if n <= 50 else 100


def minimize_classical(d: int, n: int, lam: float, n_restarts: Optional[int] = None,
                       seed: int = 0, workers: int = 1) -> ClassicalConfiguration:
    """Best local minimum over ``n_restarts`` random starts.

    Each restart draws from its own child of ``SeedSequence(seed)``, so the
    result does not depend on ``workers``.  Ties in energy are broken by the
    lexicographic order of the positions.
    """
    if d not in (1, 2):
        raise DomainError("dimension must be 1 or 2")
    if n < 2:
        raise DomainError("need at least two particles")
    if not lam > 0:
        raise DomainError("coupling must be positive")
    n_restarts = default_restarts(n) if n_restarts is None else n_restarts
    if n_restarts < 1:
        raise DomainError("need at least one restart")
    jobs = [(s, n, d, lam) for s in np.random.SeedSequence(seed).spawn(n_restarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_single_restart, jobs))
    else:
        results = [_single_restart(j) for j in jobs]
    energies = np.array([e for e, _ in results])
    best = min(range(len(results)),
               key=lambda k: (results[k][0], tuple(results[k][1].ravel())))
    pos = results[best][1]
    trap, inter, grad = kernels.energy_gradient(pos, lam)
    energy = trap + inter
    gnorm = float(np.linalg.norm(grad))
    if gnorm > GRADIENT_TOL * max(1.0, energy):
        raise ConvergenceError(f"best minimum has gradient norm {gnorm:.2e}")
    spread = (energies.max() - energy) / abs(energy)
    return ClassicalConfiguration(pos, energy, gnorm, n_restarts, lam, trap, inter,
                                  metastable=bool(spread > METASTABLE_TOL),
                                  restart_energies=energies)


def classical_breathing_check(cfg: ClassicalConfiguration) -> float:
    """sr(3,1) of a classical configuration; ``sqrt(3)`` at any stationary point."""
    if cfg.virial_residual() > VIRIAL_TOL:
        raise DomainError(
            f"configuration is not stationary (virial residual {cfg.virial_residual():.2e})")
    return sr31_from_energies(cfg.energies, alpha=1)
