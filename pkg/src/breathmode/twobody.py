"""Exact two-particle engine.

The pair separates into centre-of-mass and relative motion with
``rho = (r1 - r2)/sqrt(2)``.  The relative monopole (l = 0) problem

    -u''/2 + [gamma rho^2/2 + ((l + (d-2)/2)^2 - 1/4)/(2 rho^2)
              + lam / (2^(alpha/2) rho^alpha)] u = E u

is diagonalised on a FEDVR grid.  In 1D the Dirichlet condition at the
origin selects the antisymmetric (spin-polarised) relative state.  In 2D the
reduced function behaves like ``sqrt(rho)`` at the origin, which a Dirichlet
polynomial basis resolves only logarithmically, so the regular radial
function ``f = u / sqrt(rho)`` is used instead (finite-element basis with the
``rho d rho`` measure, generalised eigenproblem).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from . import fedvr
from .errors import DegenerateSystemError, DomainError, ResolutionError
from .model import EnergyBreakdown, Engine, GroundStateResult, SystemSpec
from .sumrules import cm_moment, moments_from_spectrum

WEIGHT_FILTER = 1e-10
DIPOLE_CAP = 1e14
# (n_elements, order) pairs tried in turn until the levels settle
REFINEMENT_SCHEDULE = ((16, 10), (24, 12), (32, 14), (48, 14), (64, 16), (96, 16))


@dataclass
class RelativeSpectrum:
    """Relative-motion spectrum with monopole matrix elements ``<0|rho^2|i>``."""

    eigenvalues: np.ndarray
    monopole_elements: np.ndarray
    l: int
    d: int
    alpha: int
    lam: float
    gamma: float
    n_states: int
    kinetic: float  # ground-state expectation values of the relative part
    trap: float
    interaction: float
    grid_label: str = ""
    _wavefunction: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.eigenvalues) < 2:
            raise DomainError("spectrum needs at least two states")
        if not np.all(np.isfinite(self.eigenvalues)):
            raise ResolutionError("non-finite eigenvalue")

    @property
    def gaps(self) -> np.ndarray:
        return self.eigenvalues - self.eigenvalues[0]

    def levels(self, n_states: Optional[int] = None) -> np.ndarray:
        """``(gap, element)`` pairs for the excited states, truncated."""
        n = self.n_states if n_states is None else n_states
        return np.column_stack((self.gaps[1:n], self.monopole_elements[1:n]))

    def wavefunction(self, index: int, rho: np.ndarray) -> np.ndarray:
        """Reduced radial function ``u_index(rho)``."""
        return self._wavefunction(index, np.asarray(rho, dtype=float))


def default_rho_max(lam: float) -> float:
    return max(8.0, 4.0 * (2.0 * lam) ** (1.0 / 3.0) + 8.0)


def _centrifugal(l: int, d: int) -> float:
    return (l + (d - 2) / 2.0) ** 2 - 0.25


def _grid(spec: SystemSpec, n_el: int, order: int, rho_max: float) -> fedvr.FedvrGrid:
    if spec.alpha == 3 and spec.lam > 0:
        # The wave function dies like exp(-c/sqrt(rho)) under the dipole
        # barrier.  Nodes where the barrier exceeds DIPOLE_CAP only add
        # roundoff, so the Dirichlet wall sits there and elements grow
        # geometrically away from it.
        start = (spec.lam / 2**1.5 / DIPOLE_CAP) ** (1.0 / 3.0)
        bounds = fedvr.graded_boundaries(rho_max, n_el, start, start=start)
        return fedvr.build_grid((start, rho_max), order=order, boundaries=bounds)
    return fedvr.build_grid((0.0, rho_max), n_el, order)


def _solve_1d(spec: SystemSpec, l: int, n_el: int, order: int, rho_max: float):
    grid = _grid(spec, n_el, order, rho_max)
    x = grid.x
    lam, a, g = spec.lam, spec.alpha, spec.trap_scale
    kin = fedvr.kinetic_matrix(grid).matrix
    cf = _centrifugal(l, 1)
    cent = cf / (2 * x**2) if cf else np.zeros_like(x)
    inter = lam / (2 ** (a / 2) * x**a)
    h = kin + np.diag(g * x**2 / 2 + cent + inter)
    # MRRR keeps eigenvalues accurate next to the large barrier entries;
    # divide-and-conquer does not
    e, vec = scipy.linalg.eigh(h, driver="evr")
    u0 = vec[:, 0]
    q = u0 @ (x[:, None] ** 2 * vec)
    parts = (u0 @ kin @ u0 + np.dot(u0**2, cent),
             np.dot(u0**2, x**2 / 2),
             np.dot(u0**2, inter))

    def wavefunction(i, rho):
        sign = np.sign(vec[np.argmax(np.abs(vec[:, i])), i])
        return sign * grid.evaluate(vec[:, i], rho)

    return e, q, parts, wavefunction


def _solve_2d(spec: SystemSpec, l: int, n_el: int, order: int, rho_max: float):
    if l != 0:
        raise DomainError("only the l = 0 sector is implemented")
    lam, a, g = spec.lam, spec.alpha, spec.trap_scale
    dirichlet_origin = a == 3 and lam > 0
    grid = _grid(spec, n_el, order, rho_max)
    stiff, mass = fedvr.weighted_fe_matrices(grid, lambda r: r)
    trap = fedvr.weighted_fe_operator(grid, lambda r: r**3 / 2)
    if lam > 0:
        # rho * lam/(2^(a/2) rho^a); for a = 3 the domain excludes the origin
        inter = fedvr.weighted_fe_operator(
            grid, lambda r: lam / 2 ** (a / 2) * r ** (1 - a))
    else:
        inter = np.zeros_like(mass)
    kin = 0.5 * stiff
    keep = slice(1 if dirichlet_origin else 0, -1)
    kin, mass, trap, inter = (m[keep, keep] for m in (kin, mass, trap, inter))
    e, vec = scipy.linalg.eigh(kin + g * trap + inter, mass, driver="gv")
    c0 = vec[:, 0]
    q = c0 @ (2 * trap) @ vec
    parts = (c0 @ kin @ c0, c0 @ trap @ c0, c0 @ inter @ c0)
    offset = 1 if dirichlet_origin else 0

    def wavefunction(i, rho):
        full = np.zeros(len(grid.nodes))
        full[offset:offset + vec.shape[0]] = vec[:, i]
        # evaluate the finite-element expansion via the interior interpolant
        f = _fe_evaluate(grid, full, rho)
        sign = np.sign(vec[np.argmax(np.abs(vec[:, i])), i])
        return sign * np.sqrt(np.clip(rho, 0, None)) * f

    return e, q, parts, wavefunction


def _fe_evaluate(grid: fedvr.FedvrGrid, nodal: np.ndarray, points: np.ndarray) -> np.ndarray:
    out = np.zeros_like(points)
    n = grid.order
    for e in range(grid.n_elements):
        a, b = grid.element_boundaries[e], grid.element_boundaries[e + 1]
        last = e == grid.n_elements - 1
        mask = (points >= a) & ((points <= b) if last else (points < b))
        if mask.any():
            sl = slice(e * (n - 1), e * (n - 1) + n)
            out[mask] = fedvr._lagrange_interp(grid.nodes[sl], nodal[sl], points[mask])
    return out


def relative_spectrum(spec: SystemSpec, l: int = 0, n_states: int = 50,
                      tol: float = 1e-9, rho_max: Optional[float] = None,
                      schedule=REFINEMENT_SCHEDULE) -> RelativeSpectrum:
    """Lowest relative levels, refined until ``E_0`` and ``E_1`` move by < ``tol``."""
    if spec.particles != 2:
        raise DomainError("the exact engine handles N = 2 only")
    if l != 0:
        raise DomainError("only the monopole (l = 0) sector is implemented")
    if n_states < 10:
        raise DomainError("n_states must be at least 10")
    rho_max = default_rho_max(spec.lam) if rho_max is None else rho_max
    solver = _solve_1d if spec.dimension == 1 else _solve_2d
    prev = None
    for n_el, order in schedule:
        e, q, parts, wf = solver(spec, l, n_el, order, rho_max)
        if len(e) < n_states:
            continue
        if prev is not None and max(abs(e[0] - prev[0]), abs(e[1] - prev[1])) < tol:
            return RelativeSpectrum(
                e, q, l, spec.dimension, spec.alpha, spec.lam, spec.trap_scale,
                n_states, *map(float, parts), grid_label=f"{n_el}x{order}",
                _wavefunction=wf)
        prev = e
    raise ResolutionError(
        f"relative levels not converged to {tol:g} at lam={spec.lam:g} "
        f"after {len(schedule)} refinements")


def relative_moment(rs: RelativeSpectrum, k: int) -> float:
    return moments_from_spectrum(rs.levels(), k)


def exact_breathing_frequency(rs: RelativeSpectrum) -> float:
    """Lowest excitation of the relative system that the monopole reaches."""
    m1 = relative_moment(rs, 1)
    weights = rs.monopole_elements[1:rs.n_states] ** 2
    ok = np.nonzero(weights > WEIGHT_FILTER * m1)[0]
    if ok.size == 0:
        raise DegenerateSystemError("no monopole-active excited state")
    return float(rs.gaps[1 + ok[0]])


def full_moments(rs: RelativeSpectrum, d: Optional[int] = None, k: int = 1) -> float:
    """Relative moment plus the analytic centre-of-mass contribution."""
    d = rs.d if d is None else d
    return relative_moment(rs, k) + cm_moment(k, d)


def ground_state(spec: SystemSpec, rs: Optional[RelativeSpectrum] = None,
                 **kwargs) -> GroundStateResult:
    """Full two-particle ground state, with ``d<r^2>/dgamma`` from the spectrum."""
    rs = relative_spectrum(spec, **kwargs) if rs is None else rs
    d, g = spec.dimension, spec.trap_scale
    t_cm, v_cm = d * math.sqrt(g) / 4.0, d / (4.0 * math.sqrt(g))
    energies = EnergyBreakdown(rs.kinetic + t_cm, rs.trap + v_cm, rs.interaction, g)
    r2 = 2.0 * energies.trap
    # the response of <rho^2> to the trap is minus the inverse-weighted sum
    dr2 = -(relative_moment(rs, -1) + cm_moment(-1, d) / math.sqrt(g) ** 3)
    return GroundStateResult(energies, r2, Engine.TWO_BODY_EXACT, dr2, 0.0,
                             meta={"grid": rs.grid_label})


def dump_wavefunctions(rs: RelativeSpectrum, path, n_points: int = 400) -> None:
    """Write ``rho, u0, u1`` samples as CSV."""
    rho = np.linspace(0.0, default_rho_max(rs.lam), n_points)
    u0, u1 = rs.wavefunction(0, rho), rs.wavefunction(1, rho)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "u0", "u1"])
        for row in zip(rho, u0, u1):
            w.writerow([f"{v:.10g}" for v in row])
