"""Finite-element discrete variable representation on an interval.

Each element carries ``order`` Gauss-Lobatto points; neighbouring elements
share their boundary point, whose basis function is the normalised "bridge"
joining the two edge Lagrange polynomials.  Both ends of the domain are
Dirichlet, so the basis consists of every global node except the first and
the last.  Functions are represented by their coefficients ``c_i`` with
``f(x_i) = c_i / sqrt(w_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from .errors import DomainError, SingularityError


def gauss_lobatto(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the ``n``-point Gauss-Lobatto nodes and weights on [-1, 1]."""
    if n < 2:
        raise DomainError("Gauss-Lobatto rule needs at least two points")
    coeffs = np.zeros(n)
    coeffs[-1] = 1.0  # P_{n-1}
    interior = np.sort(legendre.legroots(legendre.legder(coeffs)).real)
    x = np.concatenate(([-1.0], interior, [1.0]))
    p = legendre.legval(x, coeffs)
    w = 2.0 / (n * (n - 1) * p**2)
    return x, w


def lagrange_derivative_matrix(x: np.ndarray) -> np.ndarray:
    """``D[q, j] = l_j'(x_q)`` for the Lagrange polynomials on nodes ``x``."""
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    c = np.prod(diff, axis=1)
    d = (c[:, None] / c[None, :]) / diff
    np.fill_diagonal(d, 0.0)
    inv = 1.0 / diff
    np.fill_diagonal(inv, 0.0)
    d[np.diag_indices_from(d)] = inv.sum(axis=1)
    return d


@dataclass(frozen=True)
class FedvrGrid:
    domain: tuple[float, float]
    element_boundaries: np.ndarray
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    # per-element reference data, kept for operator assembly
    _ref_nodes: np.ndarray = field(repr=False, compare=False)
    _ref_weights: np.ndarray = field(repr=False, compare=False)

    @property
    def n_elements(self) -> int:
        return len(self.element_boundaries) - 1

    @property
    def size(self) -> int:
        """Number of interior (Dirichlet) basis functions."""
        return len(self.nodes) - 2

    @property
    def x(self) -> np.ndarray:
        """Interior node positions, one per basis function."""
        return self.nodes[1:-1]

    @property
    def w(self) -> np.ndarray:
        """Quadrature weights of the interior nodes."""
        return self.weights[1:-1]

    def integrate(self, values: np.ndarray) -> float:
        """Gauss-Lobatto quadrature of samples taken on all global nodes."""
        return float(np.dot(self.weights, values))

    def to_grid_values(self, coeffs: np.ndarray) -> np.ndarray:
        """Function values at interior nodes from DVR coefficients."""
        return coeffs / np.sqrt(self.w)[: coeffs.shape[0]].reshape((-1,) + (1,) * (coeffs.ndim - 1))

    def evaluate(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Interpolate a DVR vector to arbitrary points inside the domain."""
        points = np.asarray(points, dtype=float)
        full = np.zeros(len(self.nodes))
        full[1:-1] = coeffs / np.sqrt(self.w)
        out = np.zeros_like(points)
        n = self.order
        for e in range(self.n_elements):
            a, b = self.element_boundaries[e], self.element_boundaries[e + 1]
            last = e == self.n_elements - 1
            mask = (points >= a) & ((points <= b) if last else (points < b))
            if not mask.any():
                continue
            local = self.nodes[e * (n - 1): e * (n - 1) + n]
            vals = full[e * (n - 1): e * (n - 1) + n]
            out[mask] = _lagrange_interp(local, vals, points[mask])
        return out


def _lagrange_interp(xn: np.ndarray, fn: np.ndarray, x: np.ndarray) -> np.ndarray:
    diff = xn[:, None] - xn[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    dx = x[:, None] - xn[None, :]
    exact = np.isclose(dx, 0.0, atol=1e-14)
    dx[exact] = 1.0
    terms = bary[None, :] / dx
    out = (terms @ fn) / terms.sum(axis=1)
    hit_rows, hit_cols = np.nonzero(exact)
    out[hit_rows] = fn[hit_cols]
    return out


def build_grid(domain, n_elements: int | None = None, order: int = 10,
               boundaries=None) -> FedvrGrid:
    """Build a FEDVR grid.

    Either ``n_elements`` equal elements across ``domain`` or an explicit
    ascending array of element ``boundaries`` (which must span the domain).
    ``order`` is the number of Gauss-Lobatto points per element.
    """
    a, b = float(domain[0]), float(domain[1])
    if not a < b:
        raise DomainError(f"empty domain ({a}, {b})")
    if order < 3:
        raise DomainError("order must be >= 3")
    if boundaries is None:
        if n_elements is None or n_elements < 1:
            raise DomainError("n_elements must be >= 1")
        bounds = np.linspace(a, b, n_elements + 1)
    else:
        bounds = np.asarray(boundaries, dtype=float)
        if len(bounds) < 2 or np.any(np.diff(bounds) <= 0):
            raise DomainError("element boundaries must be strictly ascending")
        if not (np.isclose(bounds[0], a) and np.isclose(bounds[-1], b)):
            raise DomainError("element boundaries must span the domain")
    ref_x, ref_w = gauss_lobatto(order)
    n_el = len(bounds) - 1
    n_glob = n_el * (order - 1) + 1
    nodes = np.empty(n_glob)
    weights = np.zeros(n_glob)
    for e in range(n_el):
        lo, hi = bounds[e], bounds[e + 1]
        half = 0.5 * (hi - lo)
        sl = slice(e * (order - 1), e * (order - 1) + order)
        nodes[sl] = lo + half * (ref_x + 1.0)
        weights[sl] += half * ref_w
    # pin shared points exactly onto the element boundaries
    nodes[:: order - 1] = bounds
    return FedvrGrid((a, b), bounds, order, nodes, weights, ref_x, ref_w)


def graded_boundaries(rho_max: float, n_elements: int, first: float,
                      ratio: float = 1.6, start: float = 0.0) -> np.ndarray:
    """Element boundaries on (start, rho_max) that grow geometrically from
    ``first`` until they reach the uniform width, for wave functions with
    structure near ``start``."""
    uniform = (rho_max - start) / n_elements
    edges = [start]
    width = first
    while width < uniform and edges[-1] + width < rho_max:
        edges.append(edges[-1] + width)
        width *= ratio
    rest = rho_max - edges[-1]
    n_rest = max(1, int(np.ceil(rest / uniform)))
    edges.extend(edges[-1] + rest * np.arange(1, n_rest + 1) / n_rest)
    return np.asarray(edges)


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: np.ndarray
    label: str  # "kinetic", "potential" or "monopole"


def kinetic_matrix(grid: FedvrGrid) -> OperatorMatrix:
    """Weak-form kinetic operator ``(1/2) int u_i' u_j'`` on the Dirichlet basis."""
    n = grid.order
    d_ref = lagrange_derivative_matrix(grid._ref_nodes)
    # element block in unnormalised Lagrange functions, reference coordinates
    ref_block = 0.5 * (d_ref.T * grid._ref_weights) @ d_ref
    n_glob = len(grid.nodes)
    full = np.zeros((n_glob, n_glob))
    for e in range(grid.n_elements):
        half = 0.5 * (grid.element_boundaries[e + 1] - grid.element_boundaries[e])
        sl = slice(e * (n - 1), e * (n - 1) + n)
        full[sl, sl] += ref_block / half
    inv_sqrt_w = 1.0 / np.sqrt(grid.weights)
    full *= inv_sqrt_w[:, None] * inv_sqrt_w[None, :]
    mat = full[1:-1, 1:-1]
    mat = 0.5 * (mat + mat.T)
    return OperatorMatrix(mat, "kinetic")


def _element_lagrange(local: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the Lagrange polynomials on ``local`` at ``pts``."""
    n = len(local)
    vals = np.empty((len(pts), n))
    ders = np.empty((len(pts), n))
    for j in range(n):
        others = np.delete(local, j)
        denom = np.prod(local[j] - others)
        factors = pts[:, None] - others[None, :]
        vals[:, j] = np.prod(factors, axis=1) / denom
        acc = np.zeros(len(pts))
        for m in range(n - 1):
            acc += np.prod(np.delete(factors, m, axis=1), axis=1)
        ders[:, j] = acc / denom
    return vals, ders


def weighted_fe_matrices(grid: FedvrGrid, weight: Callable[[np.ndarray], np.ndarray],
                         extra_points: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Stiffness ``int weight u_i' u_j'`` and mass ``int weight u_i u_j`` for the
    unnormalised Lagrange (finite-element) basis on *all* global nodes.

    Integrals use Gauss-Legendre with ``order + extra_points`` points per
    element, which is exact for polynomial weights of modest degree.  Use
    ``weighted_fe_operator`` for further potentials in the same basis.
    """
    n_glob = len(grid.nodes)
    stiff = np.zeros((n_glob, n_glob))
    mass = np.zeros((n_glob, n_glob))
    for sl, vals, ders, wq, pts in _element_quadrature(grid, extra_points):
        wf = wq * weight(pts)
        stiff[sl, sl] += (ders.T * wf) @ ders
        mass[sl, sl] += (vals.T * wf) @ vals
    return stiff, mass


def weighted_fe_operator(grid: FedvrGrid, weight: Callable[[np.ndarray], np.ndarray],
                         extra_points: int = 4) -> np.ndarray:
    """``int weight u_i u_j`` for the unnormalised Lagrange basis on all nodes."""
    n_glob = len(grid.nodes)
    out = np.zeros((n_glob, n_glob))
    for sl, vals, _, wq, pts in _element_quadrature(grid, extra_points):
        out[sl, sl] += (vals.T * (wq * weight(pts))) @ vals
    return out


def _element_quadrature(grid: FedvrGrid, extra_points: int):
    n = grid.order
    xg, wg = legendre.leggauss(n + extra_points)
    ref_vals, ref_ders = _element_lagrange(grid._ref_nodes, xg)
    for e in range(grid.n_elements):
        lo, hi = grid.element_boundaries[e], grid.element_boundaries[e + 1]
        half = 0.5 * (hi - lo)
        pts = lo + half * (xg + 1.0)
        sl = slice(e * (n - 1), e * (n - 1) + n)
        yield sl, ref_vals, ref_ders / half, wg * half, pts


def diagonal_potential(grid: FedvrGrid, f: Callable[[np.ndarray], np.ndarray],
                       label: str = "potential") -> OperatorMatrix:
    """Potential ``f`` sampled on the interior nodes (diagonal in the DVR)."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        values = np.asarray(f(grid.x), dtype=float)
    values = np.broadcast_to(values, grid.x.shape)
    if not np.all(np.isfinite(values)):
        bad = grid.x[~np.isfinite(values)]
        raise SingularityError(f"potential not finite at nodes {bad[:5]}")
    return OperatorMatrix(np.diag(values), label)
