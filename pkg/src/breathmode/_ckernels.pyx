# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair kernels; same interface as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def energy_gradient(pos, double lam):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, j, k
    grad_arr = np.array(p, copy=True)
    cdef double[:, ::1] g = grad_arr
    cdef double trap = 0.0, inter = 0.0, r2, inv, inv3, dx
    cdef double diff[8]
    if d > 8:
        raise ValueError("dimension too large")
    for i in range(n):
        for k in range(d):
            trap += p[i, k] * p[i, k]
    for i in range(n):
        for j in range(i + 1, n):
            r2 = 0.0
            for k in range(d):
                diff[k] = p[i, k] - p[j, k]
                r2 += diff[k] * diff[k]
            inv = 1.0 / sqrt(r2)
            inter += inv
            inv3 = lam * inv * inv * inv
            for k in range(d):
                dx = diff[k] * inv3
                g[i, k] -= dx
                g[j, k] += dx
    return 0.5 * trap, lam * inter, grad_arr


def hessian(pos, double lam):
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], i, j, a, b
    h_arr = np.zeros((n * d, n * d))
    cdef double[:, ::1] h = h_arr
    cdef double r2, inv, inv3, inv5, v
    cdef double diff[8]
    if d > 8:
        raise ValueError("dimension too large")
    for i in range(n * d):
        h[i, i] = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            r2 = 0.0
            for a in range(d):
                diff[a] = p[i, a] - p[j, a]
                r2 += diff[a] * diff[a]
            inv = 1.0 / sqrt(r2)
            inv3 = inv * inv * inv
            inv5 = inv3 * inv * inv
            for a in range(d):
                for b in range(d):
                    v = lam * 3.0 * diff[a] * diff[b] * inv5
                    if a == b:
                        v -= lam * inv3
                    h[i * d + a, i * d + b] += v
                    h[j * d + a, j * d + b] += v
                    h[i * d + a, j * d + b] -= v
                    h[j * d + a, i * d + b] -= v
    return h_arr
