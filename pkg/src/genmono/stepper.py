"""Conservative time stepping and full runs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import (
    BoundaryReached,
    CFLViolation,
    FluxModel,
    GridSpec,
    RejectedInput,
    SchemeConfig,
    StateSnapshot,
    project_initial,
    sup_speed,
)
from .fluxes import InterfaceFluxes, interface_fluxes

CFL_LIMIT = 0.25


@dataclass(frozen=True, eq=False)
class RunHistory:
    snapshots: tuple[StateSnapshot, ...]
    config: SchemeConfig
    flux: FluxModel
    fluxes: tuple[InterfaceFluxes, ...] = ()

    @property
    def grid(self) -> GridSpec:
        return self.snapshots[0].grid

    @property
    def lam(self) -> float:
        return self.grid.lam

    @property
    def steps(self) -> int:
        return len(self.snapshots) - 1

    @property
    def final(self) -> StateSnapshot:
        return self.snapshots[-1]

    def array(self) -> np.ndarray:
        return np.vstack([s.values for s in self.snapshots])


def _check_cfl(s: StateSnapshot, cfg: SchemeConfig, f: FluxModel) -> None:
    if cfg.enforces_cfl:
        courant = s.grid.lam * sup_speed(f, s)
        if courant > CFL_LIMIT * (1 + 1e-12):
            raise CFLViolation(f"step {s.n}: lambda*sup|f'| = {courant:.6g} exceeds 1/4")


def step_with_fluxes(s: StateSnapshot, cfg: SchemeConfig, f: FluxModel) -> tuple[StateSnapshot, InterfaceFluxes]:
    if not s.margins_constant():
        raise RejectedInput("the two outermost cells at each end must be equal")
    _check_cfl(s, cfg, f)
    lam = s.grid.lam
    fl = interface_fluxes(s.values, cfg, f, lam)
    du = -lam * np.diff(fl.g)
    if np.any(du[:2] != 0) or np.any(du[-2:] != 0):
        raise BoundaryReached(f"step {s.n}: a wave reached the domain margin; enlarge the domain")
    return StateSnapshot(s.n + 1, s.values + du, s.grid), fl


def step(s: StateSnapshot, cfg: SchemeConfig, f: FluxModel) -> StateSnapshot:
    """One application of u_j - lam (g_{j+1/2} - g_{j-1/2})."""
    return step_with_fluxes(s, cfg, f)[0]


def resolve_lambda(u: StateSnapshot, cfg: SchemeConfig, f: FluxModel) -> float:
    if cfg.lam is not None:
        return cfg.lam
    speed = sup_speed(f, u)
    # f' == 0 on the data: any lambda is stable, use the target as if speed were 1
    return cfg.cfl_target / speed if speed > 0 else cfg.cfl_target


def run(u0, cfg: SchemeConfig, f: FluxModel, T: float | None = None, *, grid: GridSpec | None = None,
        steps: int | None = None) -> RunHistory:
    """Project ``u0`` (or take a snapshot as is) and march ``ceil(T/tau)`` steps.

    Lambda is fixed once from ``cfg`` and the initial data.
    Pass ``steps`` instead of ``T`` to fix the step count directly.
    """
    if isinstance(u0, StateSnapshot):
        s0 = StateSnapshot(0, u0.values, u0.grid)
    else:
        if grid is None:
            raise RejectedInput("a grid is required to project initial data")
        s0 = project_initial(u0, grid)
    lam = resolve_lambda(s0, cfg, f)
    s0 = StateSnapshot(0, s0.values, s0.grid.with_lambda(lam))
    cfg = replace(cfg, lam=lam)

    if steps is None:
        if T is None or T < 0:
            raise RejectedInput("T must be nonnegative")
        # tolerate round-off in T/tau so that T = k*tau gives exactly k steps
        steps = math.ceil(T / s0.grid.tau - 1e-9) if T > 0 else 0

    snaps = [s0]
    fls = []
    s = s0
    for _ in range(steps):
        s, fl = step_with_fluxes(s, cfg, f)
        snaps.append(s)
        fls.append(fl)
    return RunHistory(tuple(snaps), cfg, f, tuple(fls))


def write_snapshots(history: RunHistory, out: Path, layout: str = "long") -> list[Path]:
    """Snapshot CSV output.

    ``long``: one file with columns n, t, x, u.
    ``split``: one file per step with columns t, x, u.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    x = history.grid.centers
    if layout == "long":
        path = out / "snapshots.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "t", "x", "u"])
            for s in history.snapshots:
                for xi, ui in zip(x, s.values):
                    w.writerow([s.n, repr(s.t), repr(float(xi)), repr(float(ui))])
        return [path]
    if layout != "split":
        raise ValueError(f"unknown snapshot layout {layout!r}")
    paths = []
    for s in history.snapshots:
        path = out / f"snapshot_{s.n:06d}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "u"])
            for xi, ui in zip(x, s.values):
                w.writerow([repr(s.t), repr(float(xi)), repr(float(ui))])
        paths.append(path)
    return paths
