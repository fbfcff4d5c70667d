"""2D harmonic-oscillator basis and its Coulomb integrals.

The basis is the Cartesian product ``phi_nx(x) phi_ny(y)`` truncated to
``nx + ny < S`` (the lowest ``S`` shells).  Coulomb integrals use

    1/r = (2/sqrt(pi)) int_0^inf exp(-t^2 r^2) dt,

after which each Cartesian direction factorises.  With ``s = 1/(1 + 2t^2)``
the remaining integrand is a polynomial in ``s`` times ``(1 - s)^(-1/2)``,
so Gauss-Chebyshev quadrature with ``S + 2`` nodes is exact.  The per
direction integrals are Gaussians times polynomials and use Gauss-Hermite
quadrature in centre-of-mass and relative coordinates.
"""
from __future__ import annotations

import functools
import math

import numpy as np
from numpy.polynomial.hermite import hermgauss


def cartesian_basis(n_shells: int) -> list[tuple[int, int]]:
    """``(nx, ny)`` pairs ordered by shell, ``nx`` descending within a shell."""
    return [(nx, k - nx) for k in range(n_shells) for nx in range(k, -1, -1)]


def hermite_functions(nmax: int, x: np.ndarray) -> np.ndarray:
    """Normalised Hermite functions without the Gaussian, ``h_n(x)``."""
    h = np.zeros((nmax, len(x)))
    h[0] = math.pi**-0.25
    if nmax > 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for n in range(2, nmax):
        h[n] = math.sqrt(2.0 / n) * x * h[n - 1] - math.sqrt((n - 1) / n) * h[n - 2]
    return h


def one_body_1d(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``x^2`` and ``p^2`` in the 1D oscillator basis of size ``n``."""
    k = np.arange(n)
    off = 0.5 * np.sqrt((k[:-2] + 1) * (k[:-2] + 2))
    x2 = np.diag(k + 0.5) + np.diag(off, 2) + np.diag(off, -2)
    p2 = np.diag(k + 0.5) - np.diag(off, 2) - np.diag(off, -2)
    return x2, p2


def one_body(n_shells: int) -> tuple[np.ndarray, np.ndarray]:
    """Kinetic and trap matrices ``p^2/2`` and ``r^2/2`` in the 2D basis."""
    basis = cartesian_basis(n_shells)
    nx = np.array([b[0] for b in basis])
    ny = np.array([b[1] for b in basis])
    x2, p2 = one_body_1d(n_shells)
    same_x = nx[:, None] == nx[None, :]
    same_y = ny[:, None] == ny[None, :]
    kin = 0.5 * (p2[nx[:, None], nx[None, :]] * same_y + p2[ny[:, None], ny[None, :]] * same_x)
    trap = 0.5 * (x2[nx[:, None], nx[None, :]] * same_y + x2[ny[:, None], ny[None, :]] * same_x)
    return kin, trap


@functools.lru_cache(maxsize=4)
def coulomb_factors(n_shells: int) -> tuple[np.ndarray, float]:
    """Per-direction factors ``G[k, a, c, b, d]`` and the overall prefactor.

    ``(ac|bd) = pref * sum_k G[k, ax, cx, bx, dx] G[k, ay, cy, by, dy]`` in
    chemists' notation (``a, c`` on particle one).  The result is cached and
    must be treated as read-only.
    """
    s_max = n_shells
    n_nodes = s_max + 2
    xi, wi = hermgauss(2 * s_max)
    k = np.arange(1, n_nodes + 1)
    s_nodes = 0.5 * (1 + np.cos((2 * k - 1) * np.pi / (2 * n_nodes)))
    g = np.zeros((n_nodes, s_max, s_max, s_max, s_max))
    for j, s in enumerate(s_nodes):
        big, small = np.meshgrid(xi, xi * math.sqrt(s), indexing="ij")
        weights = (np.outer(wi, wi) * math.sqrt(s)).ravel()
        x1 = ((big + small) / math.sqrt(2.0)).ravel()
        x2 = ((big - small) / math.sqrt(2.0)).ravel()
        h1 = hermite_functions(s_max, x1)
        h2 = hermite_functions(s_max, x2)
        pair1 = h1[:, None, :] * h1[None, :, :]
        pair2 = (h2[:, None, :] * h2[None, :, :]) * weights
        # 1/sqrt(s) is the Jacobian of the t -> s substitution
        g[j] = np.tensordot(pair1, pair2, axes=(2, 2)) / math.sqrt(s)
    pref = (2 / math.sqrt(math.pi)) * (math.sqrt(2.0) / 4) * (math.pi / n_nodes)
    g.setflags(write=False)
    return g, pref


class CoulombOperator:
    """Direct and exchange matrices of ``1/r`` for the 2D oscillator basis.

    Works on the Cartesian factors without forming the four-index tensor.
    """

    def __init__(self, n_shells: int):
        self.n_shells = n_shells
        full, self.pref = coulomb_factors(n_shells)
        self.g = full
        s = n_shells
        k = full.shape[0]
        # G[k, a, c, b, d] with the (b, d) pair flattened for the first contraction
        self._g_rows = full.reshape(k * s * s, s * s)
        self._g_blocks = full.reshape(k, s * s, s * s)
        # swapped[k, a, c, d, b] = G[k, a, d, b, c]
        swapped = np.ascontiguousarray(full.transpose(0, 1, 4, 2, 3))
        self._x_rows = swapped.reshape(k * s * s, s * s)
        self._x_blocks = swapped.reshape(k, s * s, s * s)
        basis = cartesian_basis(n_shells)
        self.nx = np.array([b[0] for b in basis])
        self.ny = np.array([b[1] for b in basis])

    @property
    def size(self) -> int:
        return len(self.nx)

    def _to4(self, p: np.ndarray) -> np.ndarray:
        s = self.n_shells
        p4 = np.zeros((s, s, s, s), dtype=p.dtype)
        p4[self.nx[:, None], self.ny[:, None], self.nx[None, :], self.ny[None, :]] = p
        return p4

    def _from4(self, m4: np.ndarray) -> np.ndarray:
        return m4[self.nx[:, None], self.ny[:, None], self.nx[None, :], self.ny[None, :]]

    def _contract(self, rows, blocks, p4_perm):
        s = self.n_shells
        k = blocks.shape[0]
        tmp = (rows @ p4_perm.reshape(s * s, s * s)).reshape(k, s, s, s, s)
        # tmp[k, ay, cy, i, j] -> [k, (ay cy), (j i)] to pair with the x factor
        tmp = tmp.transpose(0, 1, 2, 4, 3).reshape(k, s * s, s * s)
        out = np.einsum("kij,klj->il", blocks, tmp, optimize=True)
        # out[(ax cx), (ay cy)] -> [ax, ay, cx, cy]
        return self.pref * out.reshape(s, s, s, s).transpose(0, 2, 1, 3)

    def direct(self, p: np.ndarray) -> np.ndarray:
        """``J_ac = sum_bd (ac|bd) P_db``."""
        p4 = self._to4(p)  # [dx, dy, bx, by]
        # rows (by, dy) and columns (dx, bx)
        perm = p4.transpose(3, 1, 0, 2)
        return self._from4(self._contract(self._g_rows, self._g_blocks, perm))

    def exchange(self, p: np.ndarray) -> np.ndarray:
        """``K_ac = sum_bd (ad|bc) P_db``."""
        p4 = self._to4(p)  # [dx, dy, bx, by]
        # rows (dy, by) and columns (bx, dx)
        perm = p4.transpose(1, 3, 2, 0)
        return self._from4(self._contract(self._x_rows, self._x_blocks, perm))

    def element(self, a, c, b, d) -> float:
        """Single integral ``(ac|bd)`` for Cartesian index pairs."""
        g = self.g
        return float(self.pref * np.sum(g[:, a[0], c[0], b[0], d[0]] * g[:, a[1], c[1], b[1], d[1]]))


def angular_momentum_transform(n_shells: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unitary ``U`` to eigenstates of ``L_z`` within each shell.

    Returns ``U`` (columns are the new states in the Cartesian basis), their
    ``m`` values and shell indices.
    """
    basis = cartesian_basis(n_shells)
    size = len(basis)
    index = {b: i for i, b in enumerate(basis)}
    u = np.zeros((size, size), complex)
    ms = np.zeros(size, int)
    shells = np.zeros(size, int)
    for k in range(n_shells):
        states = [(nx, k - nx) for nx in range(k, -1, -1)]
        pos = [index[b] for b in states]
        local = {b: i for i, b in enumerate(states)}
        lz = np.zeros((k + 1, k + 1), complex)
        # L_z = i (a_x a_y^+ - a_x^+ a_y)
        for j, (nx, ny) in enumerate(states):
            if nx > 0:
                lz[local[(nx - 1, ny + 1)], j] += 1j * math.sqrt(nx * (ny + 1))
            if ny > 0:
                lz[local[(nx + 1, ny - 1)], j] -= 1j * math.sqrt((nx + 1) * ny)
        w, v = np.linalg.eigh(lz)
        u[np.ix_(pos, pos)] = v
        ms[pos] = np.rint(w).astype(int)
        shells[pos] = k
    return u, ms, shells
