"""Hartree-Fock for 2D quantum dots in the oscillator shell basis.

Orbitals keep a definite angular momentum ``m`` and spin.  The occupation
of every ``(spin, m)`` block is fixed a priori by Hund's rules for the
ideal shell structure, and each block is diagonalised separately.  The
default reference is restricted open-shell (both spins share spatial
orbitals); an unrestricted variant is available for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConvergenceError, CutoffError, DomainError
from ..model import EnergyBreakdown, Engine, GroundStateResult, SystemSpec
from .oscillator import CoulombOperator, angular_momentum_transform, one_body

MIXING = 0.5
MAX_ITER = 500
DENSITY_TOL = 1e-9
CUTOFF_TOL = 1e-4
SPINS = (+1, -1)


def hund_occupation(n: int) -> list[tuple[int, int, int]]:
    """``(shell, m, spin)`` triples for the ideal ground state of ``n`` particles.

    Closed shells are doubly occupied.  In the open shell the majority spin
    takes as many states as possible, largest ``m`` first, and the minority
    spin follows in the same order.
    """
    if n < 1:
        raise DomainError("need at least one particle")
    occ = []
    k, left = 0, n
    while left > 0:
        g = k + 1
        ms = list(range(k, -k - 1, -2))
        n_up = min(left, g)
        n_down = min(left - n_up, g)
        occ += [(k, m, +1) for m in ms[:n_up]]
        occ += [(k, m, -1) for m in ms[:n_down]]
        left -= n_up + n_down
        k += 1
    return occ


def shells_needed(n: int) -> int:
    return max(k for k, _, _ in hund_occupation(n)) + 1


@dataclass
class HfState2D:
    occupation: list
    # unrestricted: spin -> (basis size, n_spin) Cartesian coefficients;
    # restricted: m -> unitary block of orbitals in the L_z basis
    coefficients: dict
    energies: EnergyBreakdown
    gamma: float
    shell_cutoff: int
    iterations: int = 0
    density_matrices: dict = field(default_factory=dict, repr=False)


class Solver2D:
    """Reusable SCF driver for one shell cutoff (basis and integrals cached)."""

    def __init__(self, shell_cutoff: int):
        if shell_cutoff < 1:
            raise DomainError("shell cutoff must be positive")
        self.shell_cutoff = shell_cutoff
        self.coulomb = CoulombOperator(shell_cutoff)
        self.kin, self.trap = one_body(shell_cutoff)
        self.u, self.ms, self.shells = angular_momentum_transform(shell_cutoff)
        self.size = len(self.ms)

    def _densities(self, fock_m: dict, counts: dict) -> tuple[dict, dict]:
        dens, coeffs = {}, {}
        for sp in SPINS:
            cols = []
            for m, n in counts[sp].items():
                idx = np.nonzero(self.ms == m)[0]
                if len(idx) < n:
                    raise DomainError(f"basis has {len(idx)} states with m={m}, need {n}")
                _, v = np.linalg.eigh(fock_m[sp][np.ix_(idx, idx)])
                c = np.zeros((self.size, n), complex)
                c[idx] = v[:, :n]
                cols.append(c)
            c = np.hstack(cols) if cols else np.zeros((self.size, 0), complex)
            cart = self.u @ c
            coeffs[sp] = cart
            dens[sp] = cart @ cart.conj().T
        return dens, coeffs

    def solve(self, spec: SystemSpec, mixing: float = MIXING, max_iter: int = MAX_ITER,
              tol: float = DENSITY_TOL, initial: Optional[dict] = None,
              restricted: bool = True) -> GroundStateResult:
        """Self-consistent ground state.

        ``initial`` warm-starts from a previous state's ``density_matrices``
        (unrestricted) or ``coefficients`` (restricted, per-``m`` orbitals).
        """
        if restricted:
            return self.solve_restricted(spec, mixing, max_iter, tol, initial)
        if spec.dimension != 2:
            raise DomainError("Solver2D needs d = 2")
        if spec.alpha != 1:
            raise DomainError("Hartree-Fock supports the Coulomb interaction only")
        occ = hund_occupation(spec.particles)
        if shells_needed(spec.particles) > self.shell_cutoff:
            raise DomainError(
                f"N={spec.particles} needs at least {shells_needed(spec.particles)} shells")
        counts = {sp: {} for sp in SPINS}
        for _, m, sp in occ:
            counts[sp][m] = counts[sp].get(m, 0) + 1
        g, lam = spec.trap_scale, spec.lam
        h = self.kin + g * self.trap
        uh = self.u.conj().T

        if initial is None:
            hm = uh @ h @ self.u
            dens, coeffs = self._densities({sp: hm for sp in SPINS}, counts)
        else:
            dens = {sp: np.array(initial[sp], dtype=complex) for sp in SPINS}
        for it in range(1, max_iter + 1):
            j = self.coulomb.direct(dens[1] + dens[-1])
            fock_m = {sp: uh @ (h + lam * (j - self.coulomb.exchange(dens[sp]))) @ self.u
                      for sp in SPINS}
            new, coeffs = self._densities(fock_m, counts)
            change = max(np.abs(new[sp] - dens[sp]).max() for sp in SPINS)
            if change < tol:
                dens = new
                break
            dens = {sp: (1 - mixing) * dens[sp] + mixing * new[sp] for sp in SPINS}
        else:
            raise ConvergenceError(
                f"2D SCF did not converge in {max_iter} iterations "
                f"(last change {change:.2e})")

        return self._result(spec, occ, dens, coeffs, it, g, lam)

    def _result(self, spec, occ, dens, coeffs, it, g, lam) -> GroundStateResult:
        total = dens[1] + dens[-1]
        j = self.coulomb.direct(total)
        inter = 0.0
        for sp in SPINS:
            k = self.coulomb.exchange(dens[sp])
            inter += 0.5 * lam * np.real(np.sum((j - k) * dens[sp].T))
        kin = float(np.real(np.sum(self.kin * total.T)))
        trap = float(np.real(np.sum(self.trap * total.T)))
        energies = EnergyBreakdown(kin, trap, float(inter), g)
        state = HfState2D(occ, coeffs, energies, g, self.shell_cutoff, it, dens)
        return GroundStateResult(energies, 2 * trap, Engine.HARTREE_FOCK,
                                 meta={"state": state, "iterations": it,
                                       "shell_cutoff": self.shell_cutoff})

    def _block_counts(self, occ) -> dict:
        """``m -> (doubly, singly)`` occupied orbital counts."""
        up, down = {}, {}
        for _, m, sp in occ:
            target = up if sp > 0 else down
            target[m] = target.get(m, 0) + 1
        out = {}
        for m in set(up) | set(down):
            nu, nd = up.get(m, 0), down.get(m, 0)
            if nd > nu:
                raise DomainError("restricted reference needs n_up >= n_down per block")
            out[m] = (nd, nu - nd)
        return out

    def solve_restricted(self, spec: SystemSpec, mixing: float = MIXING,
                         max_iter: int = MAX_ITER, tol: float = DENSITY_TOL,
                         initial: Optional[dict] = None) -> GroundStateResult:
        """Restricted open-shell SCF: both spins share the spatial orbitals.

        Uses the canonical effective Fock operator in the current orbital
        basis: averaged Fock on the diagonal blocks, the minority-spin Fock
        between closed and open shells and the majority-spin Fock between
        open and virtual orbitals.
        """
        if spec.dimension != 2 or spec.alpha != 1:
            raise DomainError("2D Coulomb systems only")
        occ = hund_occupation(spec.particles)
        if shells_needed(spec.particles) > self.shell_cutoff:
            raise DomainError(
                f"N={spec.particles} needs at least {shells_needed(spec.particles)} shells")
        counts = self._block_counts(occ)
        g, lam = spec.trap_scale, spec.lam
        h = self.kin + g * self.trap
        uh = self.u.conj().T
        hm = uh @ h @ self.u
        blocks = {m: np.nonzero(self.ms == m)[0] for m in counts}
        orbitals = {}
        for m, idx in blocks.items():
            if len(idx) < sum(counts[m]):
                raise DomainError(f"basis too small for the m={m} block")
            if initial is not None and m in initial and initial[m].shape == (len(idx),) * 2:
                orbitals[m] = np.array(initial[m], dtype=complex)
            else:
                _, orbitals[m] = np.linalg.eigh(hm[np.ix_(idx, idx)])

        def densities():
            out = {}
            for sp in SPINS:
                d = np.zeros((self.size, self.size), complex)
                for m, (nd, ns) in counts.items():
                    n_occ = nd + ns if sp > 0 else nd
                    c = np.zeros((self.size, n_occ), complex)
                    c[blocks[m]] = orbitals[m][:, :n_occ]
                    cart = self.u @ c
                    d += cart @ cart.conj().T
                out[sp] = d
            return out

        dens = densities()
        for it in range(1, max_iter + 1):
            j = self.coulomb.direct(dens[1] + dens[-1])
            fock = {sp: uh @ (h + lam * (j - self.coulomb.exchange(dens[sp]))) @ self.u
                    for sp in SPINS}
            for m, (nd, ns) in counts.items():
                idx, c = blocks[m], orbitals[m]
                fa = c.conj().T @ fock[1][np.ix_(idx, idx)] @ c
                fb = c.conj().T @ fock[-1][np.ix_(idx, idx)] @ c
                r = 0.5 * (fa + fb)
                cl, op, vi = slice(0, nd), slice(nd, nd + ns), slice(nd + ns, None)
                r[cl, op], r[op, cl] = fb[cl, op], fb[op, cl]
                r[op, vi], r[vi, op] = fa[op, vi], fa[vi, op]
                _, v = np.linalg.eigh(r)
                orbitals[m] = c @ v
            new = densities()
            change = max(np.abs(new[sp] - dens[sp]).max() for sp in SPINS)
            if change < tol:
                dens = new
                break
            dens = {sp: (1 - mixing) * dens[sp] + mixing * new[sp] for sp in SPINS}
        else:
            raise ConvergenceError(
                f"restricted 2D SCF did not converge in {max_iter} iterations "
                f"(last change {change:.2e})")
        return self._result(spec, occ, dens, orbitals, it, g, lam)


_SOLVERS: dict[int, Solver2D] = {}


def get_solver(shell_cutoff: int) -> Solver2D:
    """Cached solver per cutoff; the integrals are built once."""
    if shell_cutoff not in _SOLVERS:
        _SOLVERS[shell_cutoff] = Solver2D(shell_cutoff)
    return _SOLVERS[shell_cutoff]


def hf_solve_2d(spec: SystemSpec, shell_cutoff: int = 12, check_cutoff: bool = True,
                cutoff_tol: float = CUTOFF_TOL, **kwargs) -> GroundStateResult:
    """Hund-occupied SCF ground state; optionally verify basis convergence.

    With ``check_cutoff`` the problem is also solved with one shell fewer and
    a ``CutoffError`` is raised if the energy moves by more than
    ``cutoff_tol * E``.
    """
    gs = get_solver(shell_cutoff).solve(spec, **kwargs)
    if check_cutoff and shell_cutoff - 1 >= shells_needed(spec.particles):
        coarse = get_solver(shell_cutoff - 1).solve(spec, **kwargs)
        shift = coarse.energies.total - gs.energies.total
        gs.meta["cutoff_shift"] = shift
        if abs(shift) > cutoff_tol * abs(gs.energies.total):
            raise CutoffError(
                f"energy changes by {shift:.2e} from {shell_cutoff - 1} to "
                f"{shell_cutoff} shells; increase the cutoff")
    return gs
