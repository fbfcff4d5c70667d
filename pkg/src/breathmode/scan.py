"""Sweeps over the (lambda, N) plane with engine stitching and contour fits.

Small systems use Hartree-Fock with the sr*(1,-1) estimator, large ones use
Thomas-Fermi with sr*(3,1).  Every cell is computed by its own engine and
failures are flagged in place; nothing is interpolated.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import BreathingModeError, ContinuationError, DomainError
from .model import SystemSpec, lambda_tilde, localization_chi
from .sumrules import estimate_frequencies

FORMAT_VERSION = 1
DEFAULT_STITCH = 100
MAX_FAILED_FRACTION = 0.10
RAMP_RATIO = 3.0
WORKERS_ENV = "BREATHMODE_WORKERS"
FIELDS = ("omega", "omega_sr31_star", "omega_sr1m1_star", "chi")


class ScanError(BreathingModeError):
    """Too many cells of a scan failed; ``table`` holds the partial result."""

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


@dataclass
class ScanPlan:
    dimension: int
    lambdas: Sequence[float]
    particles: Sequence[int]
    stitch: int = DEFAULT_STITCH
    engine: str = "stitched"  # "stitched", "hf" or "tf"
    hf_sr1m1: bool = True
    shell_cutoff: int = 12
    kappa: float = 0.1
    tf_points: int = 2000
    seed: int = 0

    def __post_init__(self):
        self.lambdas = [float(v) for v in self.lambdas]
        self.particles = [int(v) for v in self.particles]
        if not self.lambdas or not self.particles:
            raise DomainError("scan grids must be non-empty")
        if any(v <= 0 for v in self.lambdas):
            raise DomainError("scan couplings must be positive")
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise DomainError("coupling grid must be strictly ascending")
        if any(n < 2 for n in self.particles):
            raise DomainError("scan particle numbers must be >= 2")
        if self.dimension not in (1, 2):
            raise DomainError("dimension must be 1 or 2")
        if self.engine not in ("stitched", "hf", "tf"):
            raise DomainError(f"unknown engine policy {self.engine!r}")

    def engine_for(self, n: int) -> str:
        if self.engine != "stitched":
            return self.engine
        return "hf" if n <= self.stitch else "tf"


@dataclass
class ScanCell:
    lam: float
    n: int
    engine: str
    omega_sr31_star: Optional[float] = None
    omega_sr1m1_star: Optional[float] = None
    chi: Optional[float] = None
    ok: bool = True
    message: str = ""

    @property
    def omega(self) -> Optional[float]:
        """sr*(1,-1) where the engine provides it, else sr*(3,1)."""
        return self.omega_sr1m1_star if self.omega_sr1m1_star is not None else self.omega_sr31_star


@dataclass
class ScanTable:
    lambdas: list
    particles: list
    cells: list  # row-major: cells[i_n * len(lambdas) + i_lam]
    metadata: dict = field(default_factory=dict)

    def cell(self, i_lam: int, i_n: int) -> ScanCell:
        return self.cells[i_n * len(self.lambdas) + i_lam]

    def grid(self, name: str) -> np.ndarray:
        """Field values with shape ``(len(particles), len(lambdas))``; nan where failed."""
        if name not in FIELDS:
            raise DomainError(f"unknown field {name!r}")
        vals = [getattr(c, name) if c.ok else None for c in self.cells]
        arr = np.array([np.nan if v is None else v for v in vals], dtype=float)
        return arr.reshape(len(self.particles), len(self.lambdas))

    @property
    def failed(self) -> list:
        return [c for c in self.cells if not c.ok]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# breathmode scan table v{FORMAT_VERSION}\n")
            fh.write("# " + json.dumps(self.metadata, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["lambda", "N", "engine", "omega", "omega_sr31_star",
                        "omega_sr1m1_star", "chi", "ok", "message"])
            for c in self.cells:
                w.writerow([repr(c.lam), c.n, c.engine, _fmt(c.omega), _fmt(c.omega_sr31_star),
                            _fmt(c.omega_sr1m1_star), _fmt(c.chi), int(c.ok), c.message])

    def to_json(self, path) -> None:
        payload = {"format": "breathmode-scan", "version": FORMAT_VERSION,
                   "metadata": self.metadata, "lambdas": self.lambdas,
                   "particles": self.particles, "cells": [asdict(c) for c in self.cells]}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, path) -> "ScanTable":
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("format") != "breathmode-scan" or payload.get("version") != FORMAT_VERSION:
            raise DomainError(f"{path} is not a version {FORMAT_VERSION} scan table")
        cells = [ScanCell(**c) for c in payload["cells"]]
        return cls(payload["lambdas"], payload["particles"], cells, payload["metadata"])


def _fmt(v):
    return "" if v is None else repr(float(v))


def _frequencies(gs, spec: SystemSpec, cell: ScanCell) -> ScanCell:
    est = estimate_frequencies(gs, spec)
    cell.omega_sr31_star = est.sr31
    cell.omega_sr1m1_star = est.sr1m1
    cell.chi = localization_chi(spec.dimension, spec.particles, gs.energies)
    return cell


def _failed(cell: ScanCell, exc: Exception) -> ScanCell:
    cell.ok = False
    cell.message = f"{type(exc).__name__}: {exc}"
    return cell


def _hf_cell(plan: ScanPlan, n: int, lam: float) -> list:
    from .hf import hf_ground_state

    cell = ScanCell(lam, n, "hf")
    spec = SystemSpec(plan.dimension, n, lam=lam,
                      kappa=plan.kappa if plan.dimension == 1 else None)
    try:
        gs = hf_ground_state(spec, shell_cutoff=plan.shell_cutoff, derivative=plan.hf_sr1m1)
        return [_frequencies(gs, spec, cell)]
    except BreathingModeError as exc:
        return [_failed(cell, exc)]


def _tf2d_cell(plan: ScanPlan, n: int, lam: float) -> list:
    from .tf import tf2d_minimize

    cell = ScanCell(lam, n, "tf")
    spec = SystemSpec(2, n, lam=lam)
    try:
        return [_frequencies(tf2d_minimize(n, lam).to_ground_state(), spec, cell)]
    except BreathingModeError as exc:
        return [_failed(cell, exc)]


def continuation_schedule(lams: Sequence[float], start: float = 1e-2,
                          ratio: float = RAMP_RATIO) -> list:
    """Ascending schedule from ``start`` through every coupling in ``lams``."""
    lams = sorted(float(v) for v in lams)
    if lams[0] <= start:
        return lams
    steps = max(1, math.ceil(math.log(lams[0] / start) / math.log(ratio)))
    ramp = list(np.geomspace(start, lams[0], steps + 1)[:-1])
    return ramp + lams


def _tf1d_chain(plan: ScanPlan, n: int, lams: Sequence[float]) -> list:
    from .tf import default_tf_grid, tf1d_continuation

    schedule = continuation_schedule(lams)
    grid = default_tf_grid(n, schedule[-1], points=plan.tf_points)
    cells = [ScanCell(lam, n, "tf") for lam in lams]
    try:
        chain = tf1d_continuation(n, schedule, plan.kappa, grid)
    except ContinuationError as exc:
        # solve the links before the failure again to keep them
        good = [v for v in schedule if v < exc.failed_lambda]
        chain = tf1d_continuation(n, good, plan.kappa, grid) if good else []
        for c in cells:
            if c.lam >= exc.failed_lambda:
                _failed(c, exc)
    by_lam = {sol.lam: sol for sol in chain}
    for c in cells:
        if c.ok:
            spec = SystemSpec(1, n, lam=c.lam, kappa=plan.kappa)
            _frequencies(by_lam[c.lam].to_ground_state(), spec, c)
    return cells


def _run_task(task) -> list:
    kind, plan, n, lams = task
    if kind == "hf":
        return _hf_cell(plan, n, lams[0])
    if kind == "tf2d":
        return _tf2d_cell(plan, n, lams[0])
    return _tf1d_chain(plan, n, lams)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_scan(plan: ScanPlan, workers: Optional[int] = None,
             max_failed_fraction: float = MAX_FAILED_FRACTION) -> ScanTable:
    """Compute every cell of the plan.

    1D Thomas-Fermi cells at fixed ``N`` form one continuation chain; every
    other cell is independent.  Results are placed by grid position, so the
    table does not depend on ``workers``.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    tasks = []
    for n in plan.particles:
        engine = plan.engine_for(n)
        if engine == "tf" and plan.dimension == 1:
            tasks.append(("tf1d", plan, n, plan.lambdas))
        else:
            kind = "hf" if engine == "hf" else "tf2d"
            tasks += [(kind, plan, n, [lam]) for lam in plan.lambdas]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    found = {(c.n, c.lam): c for cells in results for c in cells}
    cells = [found[(n, lam)] for n in plan.particles for lam in plan.lambdas]
    meta = {"plan": asdict(plan), "stitch": plan.stitch, "seed": plan.seed,
            "format_version": FORMAT_VERSION, "software_version": _version()}
    table = ScanTable(list(plan.lambdas), list(plan.particles), cells, meta)
    frac = len(table.failed) / len(cells)
    if frac > max_failed_fraction:
        raise ScanError(f"{len(table.failed)} of {len(cells)} cells failed", table)
    return table


def _version() -> str:
    from . import __version__
    return __version__


# ---------------------------------------------------------------- contours


@dataclass
class IsoContour:
    field: str
    value: float
    points: list  # (lambda, N) pairs
    out_of_range: bool = False

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _crossings(xs: np.ndarray, ys: np.ndarray, value: float) -> list:
    # half-open segments so a crossing on a node is counted once
    out = []
    for k in range(len(xs) - 1):
        y0, y1 = ys[k], ys[k + 1]
        if not (np.isfinite(y0) and np.isfinite(y1)):
            continue
        if y0 == value:
            out.append(xs[k])
        elif (y0 - value) * (y1 - value) < 0:
            t = (value - y0) / (y1 - y0)
            out.append(xs[k] + t * (xs[k + 1] - xs[k]))
    if len(xs) and ys[-1] == value:
        out.append(xs[-1])
    return out


def iso_contour(table: ScanTable, field: str, value: float, along: str = "lambda") -> IsoContour:
    """Points where ``field`` equals ``value``.

    For each grid line (fixed ``N`` when ``along="lambda"``, fixed
    ``lambda`` otherwise) the crossing is found by linear interpolation in
    ``log lambda`` or ``log N``.
    """
    grid = table.grid(field)
    finite = grid[np.isfinite(grid)]
    if finite.size == 0 or not finite.min() <= value <= finite.max():
        return IsoContour(field, value, [], out_of_range=True)
    log_l = np.log(np.asarray(table.lambdas, float))
    log_n = np.log(np.asarray(table.particles, float))
    points = []
    if along == "lambda":
        for i, n in enumerate(table.particles):
            points += [(float(np.exp(x)), float(n)) for x in _crossings(log_l, grid[i], value)]
    elif along == "n":
        for j, lam in enumerate(table.lambdas):
            points += [(float(lam), float(np.exp(x))) for x in _crossings(log_n, grid[:, j], value)]
    else:
        raise DomainError("along must be 'lambda' or 'n'")
    return IsoContour(field, value, points)


@dataclass(frozen=True)
class ContourFit:
    exponent: float
    prefactor: float
    exponent_stderr: float
    residual: float  # rms of log N about the fit
    n_points: int
    target: Optional[float] = None


def fit_power_law(points, target: Optional[float] = None) -> ContourFit:
    """Least-squares fit of ``N = A lambda^p`` in log-log coordinates."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 5:
        raise DomainError("need at least 5 contour points")
    if np.any(pts <= 0):
        raise DomainError("contour points must be positive")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DomainError("degenerate points: no spread along one axis")
    fit = stats.linregress(x, y)
    resid = y - (fit.intercept + fit.slope * x)
    return ContourFit(float(fit.slope), float(np.exp(fit.intercept)), float(fit.stderr),
                      float(np.sqrt(np.mean(resid**2))), len(pts), target)


def contour_through(table: ScanTable, field: str, lam: float, n: int) -> IsoContour:
    """Iso-line of ``field`` through the grid cell nearest to ``(lam, n)``."""
    i_l = int(np.argmin(np.abs(np.log(table.lambdas) - math.log(lam))))
    i_n = int(np.argmin(np.abs(np.log(table.particles) - math.log(n))))
    value = table.grid(field)[i_n, i_l]
    if not np.isfinite(value):
        raise DomainError("anchor cell failed")
    return iso_contour(table, field, float(value))


def lambda_tilde_overlay(table: ScanTable, dimension: int, field: str = "omega") -> list:
    """Per ``N``: ``(N, lambda_tilde, lambda at the midpoint frequency)``.

    The midpoint ``(2 + sqrt 3)/2`` separates the quantum side of the
    surface from the classical side; ``None`` when no crossing is on the grid.
    """
    mid = 0.5 * (2.0 + math.sqrt(3.0))
    grid = table.grid(field)
    log_l = np.log(np.asarray(table.lambdas, float))
    out = []
    for i, n in enumerate(table.particles):
        cross = _crossings(log_l, grid[i], mid)
        out.append((n, float(lambda_tilde(dimension, n)),
                    float(np.exp(cross[0])) if cross else None))
    return out
