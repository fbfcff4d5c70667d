"""Pure numpy pair kernels for trapped Coulomb clusters.

Energy ``sum_i r_i^2 / 2 + lam sum_{i<j} 1/r_ij`` for positions of shape
``(N, d)``.  The compiled module ``_ckernels`` provides the same functions.
"""
from __future__ import annotations

import numpy as np


def _pairs(pos: np.ndarray):
    diff = pos[:, None, :] - pos[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, np.inf)
    return diff, r2


def energy_gradient(pos: np.ndarray, lam: float) -> tuple[float, float, np.ndarray]:
    """Return ``(trap, interaction, gradient)``; the gradient has ``pos``'s shape."""
    pos = np.ascontiguousarray(pos, dtype=float)
    diff, r2 = _pairs(pos)
    inv = 1.0 / np.sqrt(r2)
    trap = 0.5 * float(np.sum(pos * pos))
    inter = 0.5 * lam * float(inv.sum())
    grad = pos - lam * np.einsum("ijk,ij->ik", diff, inv**3)
    return trap, inter, grad


def hessian(pos: np.ndarray, lam: float) -> np.ndarray:
    """Hessian of the total energy, shape ``(N d, N d)``."""
    pos = np.ascontiguousarray(pos, dtype=float)
    n, d = pos.shape
    diff, r2 = _pairs(pos)
    inv = 1.0 / np.sqrt(r2)
    # d^2(1/r)/dx_a dx_b = 3 x_a x_b / r^5 - delta_ab / r^3 for the pair block
    block = lam * (3.0 * diff[:, :, :, None] * diff[:, :, None, :] * (inv**5)[:, :, None, None]
                   - np.eye(d)[None, None] * (inv**3)[:, :, None, None])
    h = -block
    idx = np.arange(n)
    h[idx, idx] = block.sum(axis=1) + np.eye(d)
    return h.transpose(0, 2, 1, 3).reshape(n * d, n * d)
