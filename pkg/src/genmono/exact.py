"""Exact Riemann solutions, fine-grid reference runs and error measurement."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from .core import FluxModel, GridMismatch, GridSpec, RejectedInput, RiemannStep, SchemeConfig, StateSnapshot

ROOT_TOL = 1e-13
CONVERGENCE_HEADER = ["N", "h", "e_l1", "rate"]


@dataclass(frozen=True)
class RiemannSolution:
    """Self-similar solution of the Riemann problem with states v | w."""

    v: float
    w: float
    f: FluxModel

    @property
    def kind(self) -> str:
        return "shock" if self.v > self.w else "rarefaction"

    @property
    def sigma(self) -> float | None:
        if self.v <= self.w:
            return None
        return float((self.f.f(self.v) - self.f.f(self.w)) / (self.v - self.w))

    @property
    def fan(self) -> tuple[float, float] | None:
        if self.v > self.w:
            return None
        return float(self.f.f_prime(self.v)), float(self.f.f_prime(self.w))

    def inverse_speed(self, xi: float) -> float:
        """The state u in [v, w] with f'(u) = xi."""
        if self.f.speed_affine is not None:
            a, b = self.f.speed_affine
            return (xi - a) / b
        return optimize.brentq(lambda u: float(self.f.f_prime(u)) - xi, self.v, self.w, xtol=ROOT_TOL, rtol=4 * np.finfo(float).eps)

    def sample(self, xi: float) -> float:
        if self.v > self.w:
            return float(self.v if xi < self.sigma else self.w)
        lo, hi = self.fan
        if xi <= lo:
            return float(self.v)
        if xi >= hi:
            return float(self.w)
        return float(self.inverse_speed(xi))


def riemann_sample(v: float, w: float, xi, f: FluxModel):
    """R(xi; v, w); right-continuous at a shock. Accepts a scalar or an array of xi."""
    sol = RiemannSolution(float(v), float(w), f)
    if np.ndim(xi) == 0:
        return sol.sample(float(xi))
    return np.array([sol.sample(float(x)) for x in np.ravel(xi)]).reshape(np.shape(xi))


def _fan_integral(sol: RiemannSolution, p: float, q: float, T: float, x0: float) -> float:
    """Integral of the fan over x in [p, q], both inside the fan."""
    if q <= p:
        return 0.0
    f = sol.f
    if f.speed_affine is not None:
        a, b = f.speed_affine
        # u = (xi - a)/b with xi = (x - x0)/T, so the x-integral is T * int u dxi
        def prim(x):
            xi = (x - x0) / T
            return T * (0.5 * xi * xi - a * xi) / b

        return prim(q) - prim(p)
    val, _ = integrate.quad(lambda x: sol.inverse_speed((x - x0) / T), p, q, epsabs=1e-12 * (q - p), epsrel=0.0, limit=200)
    return val


def exact_riemann_cell_averages(v: float, w: float, grid: GridSpec, T: float, f: FluxModel,
                                x0: float = 0.0) -> StateSnapshot:
    """Cell averages of R((x - x0)/T; v, w) on ``grid``."""
    if not T > 0:
        raise RejectedInput("T must be positive")
    sol = RiemannSolution(float(v), float(w), f)
    faces = grid.faces
    out = np.empty(grid.N)
    if sol.kind == "shock":
        xs = x0 + sol.sigma * T
        for j in range(grid.N):
            a, b = faces[j], faces[j + 1]
            left = min(max(xs - a, 0.0), b - a)
            out[j] = (left * v + (b - a - left) * w) / (b - a)
    else:
        lo, hi = sol.fan
        xl, xr = x0 + lo * T, x0 + hi * T
        for j in range(grid.N):
            a, b = faces[j], faces[j + 1]
            left = min(max(xl - a, 0.0), b - a)
            right = min(max(b - xr, 0.0), b - a)
            p, q = max(a, xl), min(b, xr)
            out[j] = (left * v + right * w + _fan_integral(sol, p, q, T, x0)) / (b - a)
    return StateSnapshot(0, out, grid)


def average_down(fine: np.ndarray, r: int) -> np.ndarray:
    """Conservative block average of a fine state onto a grid ``r`` times coarser."""
    fine = np.asarray(fine, dtype=float)
    if fine.size % r:
        raise GridMismatch(f"{fine.size} fine cells do not split into blocks of {r}")
    return fine.reshape(-1, r).mean(axis=1)


def fine_grid_oracle(u0, f: FluxModel, T: float, refinement: int = 16, *, grid: GridSpec,
                     lam: float | None = None, cfl_target: float = 0.25) -> StateSnapshot:
    """Godunov on a grid ``refinement`` times finer, averaged back onto ``grid``.

    ``lam`` pins the mesh ratio (pass the coarse run's value so that the fine
    run lands on the same final time); otherwise it follows ``cfl_target``.
    """
    from .stepper import run

    if refinement < 8:
        raise RejectedInput("refinement must be at least 8")
    cfg = SchemeConfig("godunov", lam=lam, cfl_target=cfl_target)
    hist = run(u0, cfg, f, T, grid=grid.refined(refinement))
    return StateSnapshot(0, average_down(hist.final.values, refinement), grid)


def _same_grid(a: GridSpec, b: GridSpec) -> bool:
    scale = max(1.0, abs(a.x_min), abs(a.x_max))
    return a.N == b.N and math.isclose(a.h, b.h, rel_tol=1e-12) and abs(a.x_min - b.x_min) <= 1e-12 * scale


def l1_error(a: StateSnapshot, b: StateSnapshot) -> float:
    if not _same_grid(a.grid, b.grid):
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")
    return float(a.grid.h * np.sum(np.abs(a.values - b.values)))


def convergence_rate(errors) -> list[float]:
    """log2(e_k / e_{k+1}) for consecutive (h, e) pairs with h halving.

    A zero error on the finer grid gives ``math.inf``.
    """
    errors = [(float(h), float(e)) for h, e in errors]
    if len(errors) < 2:
        raise RejectedInput("need at least two (h, error) pairs")
    rates = []
    for (h0, e0), (h1, e1) in zip(errors, errors[1:]):
        if not math.isclose(h0, 2.0 * h1, rel_tol=1e-9):
            raise RejectedInput(f"h must halve between levels, got {h0} then {h1}")
        if e0 < 0 or e1 < 0:
            raise RejectedInput("errors must be nonnegative")
        rates.append(math.inf if e1 == 0 else math.log2(e0 / e1) if e0 > 0 else -math.inf)
    return rates


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    h: float
    e_l1: float
    rate: float | None  # None on the coarsest level
    t: float


def convergence_study(u0, f: FluxModel, cfg: SchemeConfig, Ns, x_min: float, x_max: float, T: float,
                      refinement: int = 16) -> list[ConvergenceRow]:
    """L1 errors of ``cfg`` runs on halving grids.

    Riemann data is compared with exact cell averages, anything else with
    the fine-grid oracle; either way at each run's actual final time.
    """
    from .stepper import run

    Ns = [int(n) for n in Ns]
    if len(Ns) < 3:
        raise RejectedInput("a convergence study needs at least three grid sizes")
    pairs, times = [], []
    for N in Ns:
        hist = run(u0, cfg, f, T, grid=GridSpec.uniform(N, x_min, x_max))
        t = hist.final.t
        if isinstance(u0, RiemannStep):
            ref = exact_riemann_cell_averages(u0.left, u0.right, hist.grid, t, f, u0.x0) if t > 0 else hist.snapshots[0]
        else:
            ref = fine_grid_oracle(u0, f, t, refinement, grid=hist.grid, lam=hist.lam)
        pairs.append((hist.grid.h, l1_error(hist.final, ref)))
        times.append(t)
    rates = [None] + convergence_rate(pairs)
    return [ConvergenceRow(N, h, e, r, t) for N, (h, e), r, t in zip(Ns, pairs, rates, times)]


def write_convergence_csv(rows: list[ConvergenceRow], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_HEADER)
        for r in rows:
            w.writerow([r.N, repr(r.h), repr(r.e_l1), "" if r.rate is None else repr(r.rate)])
    return path
