"""Spin-polarised Hartree-Fock in 1D on a FEDVR grid.

The Coulomb kernel is regularised, ``lam / sqrt((x - x')^2 + kappa^2)``.
In the DVR both the direct and the exchange operator are built from the
kernel sampled on node pairs: ``J = diag(W rho)`` and ``K = W * D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .. import fedvr
from ..errors import ConvergenceError, DomainError
from ..model import EnergyBreakdown, Engine, GroundStateResult, SystemSpec

ELEMENT_WIDTH = 0.3
ORDER = 10
MIXING = 0.3
MAX_ITER = 500
DENSITY_TOL = 1e-9


@dataclass
class HfState1D:
    orbitals: np.ndarray  # (grid size, N), DVR coefficients
    orbital_energies: np.ndarray
    energies: EnergyBreakdown
    gamma: float
    grid: fedvr.FedvrGrid = field(repr=False)
    iterations: int = 0
    pair_virial: float = 0.0  # <sum_pairs r w'(r)> with its sign flipped

    @property
    def density_matrix(self) -> np.ndarray:
        return self.orbitals @ self.orbitals.T

    @property
    def density(self) -> np.ndarray:
        """Particle density at the interior nodes."""
        return np.einsum("ik,ik->i", self.orbitals, self.orbitals) / self.grid.w


def default_grid_1d(spec: SystemSpec, element_width: float = ELEMENT_WIDTH,
                    order: int = ORDER) -> fedvr.FedvrGrid:
    """Symmetric box wide enough for the ideal and the classical cloud."""
    n = spec.particles
    extent = math.sqrt(2.0 * n)
    if spec.lam > 0 and n > 1:
        extent = max(extent, (3.0 * spec.lam * n * math.log(n)) ** (1.0 / 3.0))
    half = extent / math.sqrt(spec.trap_scale) + 8.0
    n_el = int(math.ceil(2 * half / element_width))
    return fedvr.build_grid((-half, half), n_el, order)


def _kernel(x: np.ndarray, lam: float, kappa: float) -> np.ndarray:
    r = x[:, None] - x[None, :]
    return lam / np.sqrt(r**2 + kappa**2)


def _pair_virial_kernel(x: np.ndarray, lam: float, kappa: float) -> np.ndarray:
    # -r w'(r) for the regularised kernel
    r2 = (x[:, None] - x[None, :]) ** 2
    return lam * r2 / (r2 + kappa**2) ** 1.5


def _pair_expectation(kernel: np.ndarray, d: np.ndarray) -> float:
    rho = np.diag(d)
    return 0.5 * (rho @ kernel @ rho - np.sum(kernel * d * d))


def hf_solve_1d(spec: SystemSpec, grid: Optional[fedvr.FedvrGrid] = None,
                mixing: float = MIXING, max_iter: int = MAX_ITER,
                tol: float = DENSITY_TOL,
                initial: Optional[np.ndarray] = None) -> GroundStateResult:
    """Self-consistent ground state of ``N`` spin-polarised fermions.

    ``initial`` is an optional starting density matrix on the same grid;
    by default the ideal (lam = 0) orbitals are used.
    """
    if spec.dimension != 1:
        raise DomainError("hf_solve_1d needs d = 1")
    if spec.alpha != 1:
        raise DomainError("Hartree-Fock supports the Coulomb interaction only")
    if not spec.kappa > 0:
        raise DomainError("1D Coulomb needs kappa > 0")
    if not 0 < mixing <= 1:
        raise DomainError("mixing must lie in (0, 1]")
    grid = default_grid_1d(spec) if grid is None else grid
    n = spec.particles
    if n > grid.size:
        raise DomainError(f"grid holds {grid.size} states, need {n}")
    x, w = grid.x, grid.w
    g = spec.trap_scale
    kin = fedvr.kinetic_matrix(grid).matrix
    h = kin + np.diag(g * x**2 / 2)
    kernel = _kernel(x, spec.lam, spec.kappa)
    sub = [0, n - 1]

    if initial is None:
        _, c = scipy.linalg.eigh(h, subset_by_index=sub, driver="evr")
        d = c @ c.T
    else:
        d = np.array(initial, dtype=float)
        if d.shape != h.shape:
            raise DomainError("initial density matrix does not match the grid")
    for it in range(1, max_iter + 1):
        rho = np.diag(d)
        fock = h + np.diag(kernel @ rho) - kernel * d
        eps, c = scipy.linalg.eigh(fock, subset_by_index=sub, driver="evr")
        d_out = c @ c.T
        change = np.max(np.abs(np.diag(d_out) - rho) / w)
        if change < tol:
            d = d_out
            break
        d = (1 - mixing) * d + mixing * d_out
    else:
        raise ConvergenceError(
            f"1D SCF did not converge in {max_iter} iterations "
            f"(last density change {change:.2e}); try smaller mixing")

    rho = np.diag(d)
    energies = EnergyBreakdown(float(np.sum(kin * d)), float(np.dot(x**2 / 2, rho)),
                               float(_pair_expectation(kernel, d)), g)
    pair_vir = float(_pair_expectation(_pair_virial_kernel(x, spec.lam, spec.kappa), d))
    state = HfState1D(c, eps, energies, g, grid, it, pair_vir)
    return GroundStateResult(energies, float(np.dot(x**2, rho)), Engine.HARTREE_FOCK,
                             density=state.density,
                             meta={"state": state, "iterations": it,
                                   "grid": f"{grid.n_elements}x{grid.order}"})


def generalized_virial_residual(gs: GroundStateResult) -> float:
    """Virial residual including the regularisation term of the kernel.

    For ``w = lam/sqrt(r^2 + kappa^2)`` the exact identity reads
    ``2T - 2 gamma V + lam <sum r^2/(r^2 + kappa^2)^(3/2)> = 0``.
    """
    state = gs.meta["state"]
    e = gs.energies
    return abs(2 * e.kinetic - 2 * e.gamma * e.trap + state.pair_virial) / max(e.total, 1.0)
