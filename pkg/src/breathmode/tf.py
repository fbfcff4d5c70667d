"""Thomas-Fermi engines.

1D: self-consistent density on a uniform grid for the spin-polarised gas,

    (pi^2/2) n(x)^2 + gamma x^2/2 + lam int n(x') w(x - x') dx' = mu,

with ``w(r) = 1/sqrt(r^2 + kappa^2)``.  The convolution uses product
integration: the density is piecewise linear and each hat function is
integrated against the kernel in closed form, so the result stays accurate
when ``kappa`` is below the grid spacing.

2D: variational parabolic profile ``n(r) = (r0^2 - r^2)/(2 pi g)`` with the
analytic three-term energy in the width parameter ``g``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.optimize import brentq
from scipy.signal import fftconvolve

from .errors import ContinuationError, ConvergenceError, DomainError
from .model import TF2D_INTERACTION, EnergyBreakdown, Engine, GroundStateResult

GRID_POINTS = 2000
MIXING = 0.2
MIXING_STEPS = 30
MAX_ITER = 200
RESIDUAL_TOL = 1e-7


# ---------------------------------------------------------------- 1D


@dataclass(frozen=True)
class UniformGrid:
    x: np.ndarray

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def integrate(self, f: np.ndarray) -> float:
        # trapezoid; the density vanishes at both ends
        return float(self.h * (np.sum(f) - 0.5 * (f[0] + f[-1])))


def default_tf_grid(n: int, lam: float, points: int = GRID_POINTS,
                    trap_scale: float = 1.0) -> UniformGrid:
    half = 1.5 * math.sqrt(2.0 * n * (1.0 + lam)) / trap_scale**0.25
    return UniformGrid(np.linspace(-half, half, points))


@dataclass
class TfDensity1D:
    grid: UniformGrid = field(repr=False)
    density: np.ndarray = field(repr=False)
    mu: float
    energies: EnergyBreakdown
    lam: float
    n: int
    kappa: float
    gamma: float
    residual: float
    iterations: int
    clamped: bool = False  # a negative iterate was clipped during the solve

    def to_ground_state(self) -> GroundStateResult:
        r2 = self.grid.integrate(self.grid.x**2 * self.density)
        return GroundStateResult(self.energies, r2, Engine.THOMAS_FERMI,
                                 density=self.density,
                                 meta={"mu": self.mu, "residual": self.residual,
                                       "iterations": self.iterations})

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "n"])
            for x, v in zip(self.grid.x, self.density):
                w.writerow([f"{x:.10g}", f"{v:.10g}"])


def ideal_density_1d(n: int, x: np.ndarray) -> np.ndarray:
    """Semicircle ``(1/pi) sqrt(2N - x^2)``, the exact ideal-gas TF profile."""
    return np.sqrt(np.clip(2.0 * n - np.asarray(x) ** 2, 0.0, None)) / math.pi


def hat_kernel_weights(h: float, kappa: float, count: int) -> np.ndarray:
    """``c_k = int hat(u) / sqrt((u - k h)^2 + kappa^2) du`` for ``|k| < count``.

    ``hat`` is the unit tent of half-width ``h`` centred at zero.
    """
    s = h * np.arange(-(count - 1), count)

    def f0(u):
        return np.arcsinh((u - s) / kappa)

    def f1(u):
        return np.sqrt((u - s) ** 2 + kappa**2) + s * np.arcsinh((u - s) / kappa)

    right = (f0(h) - f0(0.0)) - (f1(h) - f1(0.0)) / h
    left = (f0(0.0) - f0(-h)) + (f1(0.0) - f1(-h)) / h
    return right + left


class _Convolver:
    def __init__(self, grid: UniformGrid, kappa: float):
        self.weights = hat_kernel_weights(grid.h, kappa, len(grid.x))
        self.size = len(grid.x)

    def __call__(self, n: np.ndarray) -> np.ndarray:
        full = fftconvolve(n, self.weights, mode="full")
        return full[self.size - 1: 2 * self.size - 1]


def _density_for(mu: float, v_eff: np.ndarray) -> np.ndarray:
    return np.sqrt(2.0 * np.clip(mu - v_eff, 0.0, None)) / math.pi


def _normalise(v_eff: np.ndarray, grid: UniformGrid, n: int) -> tuple[float, np.ndarray]:
    lo = float(v_eff.min())
    step = 1.0
    while grid.integrate(_density_for(lo + step, v_eff)) < n:
        step *= 2.0
    mu = brentq(lambda m: grid.integrate(_density_for(m, v_eff)) - n,
                lo, lo + step, xtol=1e-14, rtol=1e-15)
    return mu, _density_for(mu, v_eff)


def tf1d_solve(n: int, lam: float, kappa: float = 0.1,
               grid: Optional[UniformGrid] = None,
               initial: Optional[np.ndarray] = None, gamma: float = 1.0,
               mixing: float = MIXING, mixing_steps: int = MIXING_STEPS,
               max_iter: int = MAX_ITER, tol: float = RESIDUAL_TOL) -> TfDensity1D:
    """Self-consistent 1D TF density.

    Each step fixes ``mu`` by root bracketing so the density integrates to
    ``N``.
    """
    if n < 1:
        raise DomainError("need at least one particle")
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    if lam < 0:
        raise DomainError("coupling must be non-negative")
    grid = default_tf_grid(n, lam, trap_scale=gamma) if grid is None else grid
    x = grid.x
    trap = gamma * x**2 / 2
    conv = _Convolver(grid, kappa)
    if initial is None:
        dens = ideal_density_1d(n, x * gamma**0.25) * gamma**0.25
    else:
        dens = np.array(initial, dtype=float)
    clamped = bool(np.any(dens < 0))
    dens = np.clip(dens, 0.0, None)
    norm = grid.integrate(dens)
    if not norm > 0:
        raise DomainError("initial density is empty")
    dens *= n / norm

    def update(rho):
        v_eff = trap + lam * conv(rho)
        mu, out = _normalise(v_eff, grid, n)
        return v_eff, mu, out

    def tf_residual(rho):
        # (pi^2/2) n^2 = max(0, mu - v_eff) holds on and off the support
        v_eff, mu, _ = update(rho)
        gap = (math.pi**2 / 2) * rho**2 - np.clip(mu - v_eff, 0.0, None)
        return float(np.max(np.abs(gap))), mu

    # damped linear mixing first; strong coupling makes that map unstable,
    # so a Newton-Krylov solve on n_out(n) - n finishes the job
    residual, mu = tf_residual(dens)
    best = (residual, mu, dens)
    it = 0
    while residual >= tol and it < mixing_steps:
        it += 1
        dens = (1 - mixing) * dens + mixing * update(dens)[2]
        residual, mu = tf_residual(dens)
        if residual < best[0]:
            best = (residual, mu, dens)
    residual, mu, dens = best
    if residual >= tol:
        sol = optimize.root(lambda rho: update(rho)[2] - rho, dens, method="krylov",
                            options={"fatol": 1e-12, "maxiter": max_iter})
        it += sol.nit
        candidate = np.clip(sol.x, 0.0, None)
        candidate *= n / grid.integrate(candidate)
        cand_res, cand_mu = tf_residual(candidate)
        if cand_res < residual:
            dens, residual, mu = candidate, cand_res, cand_mu
    if residual >= tol:
        raise ConvergenceError(
            f"TF iteration stalled at residual {residual:.2e} (lam={lam:g}); "
            "use tf1d_continuation to approach this coupling")

    hartree = lam * conv(dens)
    energies = EnergyBreakdown(
        (math.pi**2 / 6) * grid.integrate(dens**3),
        grid.integrate(x**2 / 2 * dens),
        0.5 * grid.integrate(dens * hartree), gamma)
    return TfDensity1D(grid, dens, mu, energies, lam, n, kappa, gamma,
                       residual, it, clamped)


def tf1d_continuation(n: int, schedule: Sequence[float], kappa: float = 0.1,
                      grid: Optional[UniformGrid] = None, **kwargs) -> list[TfDensity1D]:
    """Solve along an ascending coupling schedule, warm-starting each link."""
    lams = [float(v) for v in schedule]
    if not lams:
        raise DomainError("empty schedule")
    if lams[0] > 1e-2:
        raise DomainError("schedule must start at lam <= 1e-2")
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise DomainError("schedule must be strictly ascending")
    grid = default_tf_grid(n, lams[-1]) if grid is None else grid
    chain = []
    dens = None
    for lam in lams:
        try:
            sol = tf1d_solve(n, lam, kappa, grid, initial=dens, **kwargs)
        except ConvergenceError as exc:
            raise ContinuationError(str(exc), failed_lambda=lam) from exc
        chain.append(sol)
        dens = sol.density
    return chain


# ---------------------------------------------------------------- 2D


@dataclass(frozen=True)
class Tf2dResult:
    gamma_shape: float
    r0: float
    energies: EnergyBreakdown
    n: int
    lam: float

    def to_ground_state(self) -> GroundStateResult:
        e = self.energies
        return GroundStateResult(e, 2 * e.trap, Engine.THOMAS_FERMI,
                                 meta={"gamma_shape": self.gamma_shape, "r0": self.r0})

    def as_row(self) -> list:
        e = self.energies
        return [self.n, self.lam, self.gamma_shape, e.kinetic, e.trap, e.interaction, e.total]


TF2D_COLUMNS = ["N", "lambda", "gamma_tf", "T", "V", "W", "E"]


def tf2d_energy(gamma_shape: float, n: int, lam: float, trap_scale: float = 1.0) -> EnergyBreakdown:
    """Kinetic, trap and interaction energy of the parabolic profile."""
    if not gamma_shape > 0:
        raise DomainError("shape parameter must be positive")
    a = n**1.5 / 3.0
    return EnergyBreakdown(a / math.sqrt(gamma_shape), a * math.sqrt(gamma_shape),
                           lam * TF2D_INTERACTION * gamma_shape**-0.25 * n**1.75,
                           trap_scale)


def _tf2d_slope(u: float, n: int, lam: float, trap_scale: float) -> float:
    """``dE/du`` with ``u = ln g``; increasing in ``u`` (convex energy)."""
    a = n**1.5 / 3.0
    return (-0.5 * a * math.exp(-0.5 * u) + 0.5 * trap_scale * a * math.exp(0.5 * u)
            - 0.25 * lam * TF2D_INTERACTION * n**1.75 * math.exp(-0.25 * u))


def tf2d_minimize(n: int, lam: float, trap_scale: float = 1.0) -> Tf2dResult:
    """Minimise the parabolic-profile energy over the width parameter.

    The energy is convex in ``ln g``, so Brent's method on its derivative
    finds the unique minimiser.
    """
    if n < 1:
        raise DomainError("need at least one particle")
    if lam < 0:
        raise DomainError("coupling must be non-negative")
    lo, hi = -1.0, 1.0
    while _tf2d_slope(lo, n, lam, trap_scale) > 0:
        lo -= 4.0
    while _tf2d_slope(hi, n, lam, trap_scale) < 0:
        hi += 4.0
    u = brentq(_tf2d_slope, lo, hi, args=(n, lam, trap_scale), xtol=1e-15, rtol=1e-15)
    g = math.exp(u)
    return Tf2dResult(g, math.sqrt(2.0 * math.sqrt(g * n)),
                      tf2d_energy(g, n, lam, trap_scale), n, lam)


def tf2d_gradient(result: Tf2dResult, trap_scale: float = 1.0) -> float:
    """``dE/dg`` at the stored minimiser."""
    g = result.gamma_shape
    return _tf2d_slope(math.log(g), result.n, result.lam, trap_scale) / g


def dump_tf2d_rows(results: Sequence[Tf2dResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TF2D_COLUMNS)
        for r in results:
            w.writerow([f"{v:.12g}" for v in r.as_row()])
