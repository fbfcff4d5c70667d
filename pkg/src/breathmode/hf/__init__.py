"""Hartree-Fock engines: 1D FEDVR and 2D oscillator-shell basis."""
from ..sumrules import r2_gamma_derivative, with_r2_derivative
from .driver import hf_ground_state
from .checkpoint import load_checkpoint, save_checkpoint
from .scf1d import HfState1D, default_grid_1d, generalized_virial_residual, hf_solve_1d
from .scf2d import HfState2D, Solver2D, hf_solve_2d, hund_occupation, shells_needed

__all__ = [
    "HfState1D", "HfState2D", "Solver2D", "default_grid_1d",
    "generalized_virial_residual", "hf_ground_state", "hf_solve_1d", "hf_solve_2d",
    "hund_occupation", "load_checkpoint", "r2_gamma_derivative",
    "save_checkpoint", "shells_needed", "with_r2_derivative",
]
