"""Hartree-Fock ground states with the ``d<r^2>/dgamma`` needed for ``m_-1``."""
from __future__ import annotations

from ..errors import DomainError
from ..model import GroundStateResult, SystemSpec
from ..sumrules import r2_gamma_derivative
from .scf1d import default_grid_1d, hf_solve_1d
from .scf2d import get_solver, hf_solve_2d

SHELL_CUTOFF = 12


def hf_ground_state(spec: SystemSpec, shell_cutoff: int = SHELL_CUTOFF,
                    check_cutoff: bool = False, derivative: bool = True,
                    epsilon: float = 1e-3) -> GroundStateResult:
    """Solve at ``spec`` and, with ``derivative``, attach ``d<r^2>/dgamma``.

    The shifted-trap solves reuse the grid (1D) or basis (2D) of the
    reference solve and start from its converged state.
    """
    if spec.dimension == 1:
        grid = default_grid_1d(spec)
        gs = hf_solve_1d(spec, grid=grid)
        start = gs.meta["state"].density_matrix

        def shifted(s):
            return hf_solve_1d(s, grid=grid, initial=start)
    else:
        gs = hf_solve_2d(spec, shell_cutoff=shell_cutoff, check_cutoff=check_cutoff)
        start = gs.meta["state"].coefficients
        solver = get_solver(shell_cutoff)

        def shifted(s):
            return solver.solve(s, initial=start)
    if derivative:
        deriv, err = r2_gamma_derivative(lambda s: gs if s == spec else shifted(s),
                                         spec, epsilon)
        if not deriv < 0:
            raise DomainError(f"d<r^2>/dgamma = {deriv:.3g} is not negative")
        gs.r2_dgamma = deriv
        gs.r2_dgamma_error = err
    return gs
