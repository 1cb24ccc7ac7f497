"""Command-line driver: run, verify, paths and converge.

Configuration comes from an INI-style file (sections ``[run]``,
``[initial]``, ``[converge]``) or the same structure as JSON; command-line
flags override file values.  Exit codes: 0 success, 1 a check failed,
2 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .core import (
    FLUXES,
    SCHEMES,
    ConfigError,
    GaussianBump,
    GenMonoError,
    GridSpec,
    PiecewiseAffine,
    RiemannStep,
    SchemeConfig,
    SmoothRamp,
    StateSnapshot,
    derive_entropy_flux,
    get_flux,
    total_variation,
)
from .exact import convergence_study, write_convergence_csv
from .paths import build_paths, check_oscillation_bound, paths_or_report, write_paths_csv
from .report import DiagnosticReport, dumps, merge_reports
from .stepper import RunHistory, run, write_snapshots
from .suite import random_bv_state

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

CHECKS = (
    "max_principle", "decay", "entropy", "linf", "tvd", "incremental",
    "monotonicity", "slopes", "paths", "oscillation",
)
DEFAULT_CHECKS = ("max_principle", "entropy", "decay")
# these need inf f'' > 0
CONVEX_CHECKS = ("decay", "oscillation")
REPORT_IDS = {
    "max_principle": "strong_max_principle", "decay": "quadratic_decay", "entropy": "cell_entropy",
    "linf": "linf_stability", "tvd": "tvd", "incremental": "incremental_conditions",
    "monotonicity": "monotonicity_preserving", "slopes": "extremum_slopes", "paths": "path_structure",
    "oscillation": "oscillation_bound",
}

PRESETS = {
    "riemann": {"left": 1.0, "right": -1.0, "x0": 0.0},
    "spike": {"height": 1.0, "base": 0.0},
    "gaussian": {"center": 0.0, "width": 0.1, "amplitude": 1.0, "base": 0.0},
    "ramp": {"lo": 0.5, "hi": 1.5, "a": -0.5, "b": 0.5},
    "annihilation": {},
    "random": {},
}


@dataclass
class RunConfig:
    flux: str = "burgers"
    scheme: str = "godunov"
    Q: float = 1.0
    preset: str = "riemann"
    params: dict = field(default_factory=dict)
    N: int = 200
    x_min: float = -1.0
    x_max: float = 1.0
    cfl: float | None = None
    lam: float | None = None
    T: float | None = None
    steps: int | None = None
    checks: tuple[str, ...] = DEFAULT_CHECKS
    out: Path = Path("out")
    seed: int = 0
    count: int = 1
    Ns: tuple[int, ...] = (100, 200, 400)
    refinement: int = 16
    layout: str = "long"

    def __post_init__(self):
        if self.flux not in FLUXES:
            raise ConfigError(f"unknown flux {self.flux!r}; known: {', '.join(FLUXES)}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; known: {', '.join(SCHEMES)}")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; known: {', '.join(PRESETS)}")
        unknown = set(self.params) - set(PRESETS[self.preset])
        if unknown:
            raise ConfigError(f"preset {self.preset!r} takes no parameter(s) {sorted(unknown)}")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise ConfigError(f"unknown check(s) {bad}; known: {', '.join(CHECKS)}")
        if self.cfl is not None and self.lam is not None:
            raise ConfigError("give either cfl or lambda, not both")
        if self.T is not None and self.steps is not None:
            raise ConfigError("give either T or steps, not both")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min")
        if self.count < 1:
            raise ConfigError("count must be positive")
        if self.layout not in ("long", "split"):
            raise ConfigError("snapshots layout must be 'long' or 'split'")

    def scheme_config(self) -> SchemeConfig:
        kw = {"scheme": self.scheme, "Q": self.Q, "lam": self.lam}
        if self.cfl is not None:
            kw["cfl_target"] = self.cfl
        try:
            return SchemeConfig(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self, N: int | None = None) -> GridSpec:
        return GridSpec.uniform(N or self.N, self.x_min, self.x_max)

    def initial(self, seed: int | None = None, N: int | None = None):
        """The preset as a callable/preset object, or a snapshot for grid-level data."""
        p = {**PRESETS[self.preset], **self.params}
        grid = self.grid(N)
        if self.preset == "riemann":
            return RiemannStep(p["left"], p["right"], p["x0"])
        if self.preset == "spike":
            u = np.full(grid.N, float(p["base"]))
            u[grid.N // 2] = p["height"]
            return StateSnapshot(0, u, grid)
        if self.preset == "gaussian":
            return GaussianBump(p["center"], p["width"], p["amplitude"], p["base"])
        if self.preset == "ramp":
            return SmoothRamp(p["lo"], p["hi"], p["a"], p["b"])
        if self.preset == "annihilation":
            # a min-max dip in a falling profile; the two shocks around it merge near t = 0.8
            return PiecewiseAffine(((-0.1, 1.5), (-0.1, 0.5), (0.1, 0.5), (0.1, 1.0), (0.3, 1.0), (0.3, 0.0)))
        return random_bv_state(self.seed if seed is None else seed, grid.N, x_min=self.x_min, x_max=self.x_max)


_FLOATS = {"Q", "x_min", "x_max", "cfl", "lam", "T"}
_INTS = {"N", "steps", "seed", "count", "refinement"}
_KEY_ALIASES = {"lambda": "lam", "n": "N", "t": "T", "q": "Q", "snapshots": "layout"}


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _FLOATS:
            return float(value)
        if key in _INTS:
            return int(value)
        if key in ("checks", "Ns"):
            items = value if isinstance(value, (list, tuple)) else [s.strip() for s in str(value).split(",") if s.strip()]
            return tuple(int(i) for i in items) if key == "Ns" else tuple(items)
        if key == "out":
            return Path(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def _read_file(path: Path) -> dict:
    """Sections as plain dicts, from JSON or INI."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON config: {exc}") from exc
        if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
            raise ConfigError("JSON config must map section names to objects")
        return data
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return {name: dict(parser[name]) for name in parser.sections()}


def load_config(path: Path | None = None, overrides: dict | None = None) -> RunConfig:
    sections = _read_file(path) if path else {}
    unknown = set(sections) - {"run", "initial", "converge"}
    if unknown:
        raise ConfigError(f"unknown config section(s) {sorted(unknown)}")
    kw: dict = {}
    for key, value in {**sections.get("run", {}), **sections.get("converge", {})}.items():
        key = _KEY_ALIASES.get(key, key)
        if key not in RunConfig.__dataclass_fields__ or key in ("preset", "params"):
            raise ConfigError(f"unknown config key {key!r}")
        kw[key] = _coerce(key, value)
    initial = dict(sections.get("initial", {}))
    if "preset" in initial:
        kw["preset"] = initial.pop("preset")
    try:
        kw["params"] = {k: float(v) for k, v in initial.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"preset parameters must be numbers: {exc}") from exc
    for key, value in (overrides or {}).items():
        if value is not None:
            kw[key] = _coerce(key, value)
    return RunConfig(**kw)


def _run(cfg: RunConfig, seed: int | None = None, N: int | None = None) -> RunHistory:
    # no T and no steps: just the projected initial state
    steps = cfg.steps if cfg.steps is not None else (None if cfg.T is not None else 0)
    return run(cfg.initial(seed, N), cfg.scheme_config(), get_flux(cfg.flux), cfg.T, grid=cfg.grid(N), steps=steps)


def run_summary(history: RunHistory, cfg: RunConfig) -> dict:
    h = history.grid.h
    return {
        "flux": cfg.flux,
        "scheme": cfg.scheme,
        "Q": cfg.Q if cfg.scheme == "lax_friedrichs" else None,
        "N": history.grid.N,
        "h": h,
        "lambda": history.lam,
        "steps": [
            {"n": s.n, "t": s.t, "tv": total_variation(s), "linf": float(np.max(np.abs(s.values))),
             "mass": float(h * np.sum(s.values))}
            for s in history.snapshots
        ],
    }


def cmd_run(cfg: RunConfig) -> list[Path]:
    history = _run(cfg)
    files = write_snapshots(history, cfg.out, cfg.layout)
    summary = cfg.out / "summary.json"
    summary.write_text(json.dumps(run_summary(history, cfg), indent=2, sort_keys=True) + "\n")
    return files + [summary]


def verify_history(history: RunHistory, checks, notices: list[str] | None = None) -> list[DiagnosticReport]:
    f = history.flux
    alpha = history.lam * f.convexity_floor / 2.0
    reports = []
    paths = structure = None
    for check in checks:
        if check in CONVEX_CHECKS and not f.strictly_convex:
            msg = f"{check} needs a strictly convex flux; flux {f.name!r} has inf f'' = {f.convexity_floor}"
            if notices is not None:
                notices.append(msg)
            reports.append(DiagnosticReport.skipped(REPORT_IDS[check], msg, {"lambda": history.lam}))
            continue
        if check == "max_principle":
            reports.append(diag.check_strong_max_principle(history))
        elif check == "decay":
            reports.append(diag.check_quadratic_decay(history, alpha))
        elif check == "entropy":
            reports.append(diag.check_cell_entropy(history, derive_entropy_flux(f)))
        elif check == "linf":
            reports.append(diag.check_linf_stability(history))
        elif check == "tvd":
            reports.append(diag.check_tvd(history))
        elif check == "incremental":
            reports.append(diag.check_incremental_conditions(history))
        elif check == "monotonicity":
            reports.append(diag.check_monotonicity_preserving(history))
        elif check == "slopes":
            reports.append(diag.check_extremum_slopes(history))
        else:
            if structure is None:
                paths, structure = paths_or_report(history)
            if check == "paths":
                reports.append(structure)
            elif paths is None:
                reports.append(DiagnosticReport.skipped("oscillation_bound", "no extremum paths: " + structure.notes[0]))
            else:
                reports.append(merge_reports(
                    "oscillation_bound", [check_oscillation_bound(p, history, alpha) for p in paths]
                ))
    return reports


def cmd_verify(cfg: RunConfig, notices: list[str] | None = None) -> tuple[Path, bool]:
    """Run the requested checks over ``count`` seeds; the report file holds one entry per check."""
    per_check: dict[str, list[DiagnosticReport]] = {}
    seeds = range(cfg.seed, cfg.seed + cfg.count) if cfg.preset == "random" else [cfg.seed]
    for seed in seeds:
        for rep in verify_history(_run(cfg, seed), cfg.checks, notices):
            per_check.setdefault(rep.check, []).append(rep)
    reports = [merge_reports(name, reps) for name, reps in per_check.items()]
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "report.json"
    path.write_text(dumps(reports) + "\n")
    return path, all(r.passed for r in reports)


def cmd_paths(cfg: RunConfig) -> Path:
    history = _run(cfg)
    return write_paths_csv(build_paths(history), history, cfg.out / "paths.csv")


def cmd_converge(cfg: RunConfig) -> Path:
    u0 = cfg.initial()
    if isinstance(u0, StateSnapshot):
        raise ConfigError(f"preset {cfg.preset!r} is grid-dependent and cannot be refined")
    if cfg.T is None:
        raise ConfigError("converge needs T")
    rows = convergence_study(u0, get_flux(cfg.flux), cfg.scheme_config(), cfg.Ns, cfg.x_min, cfg.x_max, cfg.T,
                             cfg.refinement)
    return write_convergence_csv(rows, cfg.out / "convergence.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genmono", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "march a scheme and write snapshots plus a summary"),
        ("verify", "run the scheme and certify the requested inequalities"),
        ("paths", "extract extremum paths to CSV"),
        ("converge", "L1 errors and observed rates over halving grids"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path)
        p.add_argument("--scheme", choices=SCHEMES)
        p.add_argument("--flux", choices=sorted(FLUXES))
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--N", type=int)
        p.add_argument("--x-min", dest="x_min", type=float)
        p.add_argument("--x-max", dest="x_max", type=float)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--cfl", type=float)
        p.add_argument("--T", type=float)
        p.add_argument("--steps", type=int)
        p.add_argument("--Q", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=Path)
        p.add_argument("--checks", help=f"comma-separated subset of: {', '.join(CHECKS)}")
        p.add_argument("--snapshots", dest="layout", choices=("long", "split"))
        if name == "converge":
            p.add_argument("--Ns", help="comma-separated grid sizes, h halving")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "run":
            for path in cmd_run(cfg):
                print(path)
        elif args.command == "verify":
            notices: list[str] = []
            path, ok = cmd_verify(cfg, notices)
            for msg in dict.fromkeys(notices):
                print(f"notice: {msg}", file=sys.stderr)
            for rep in json.loads(path.read_text()):
                print(DiagnosticReport.from_dict(rep).summary())
            print(path)
            return EXIT_OK if ok else EXIT_FAIL
        elif args.command == "paths":
            print(cmd_paths(cfg))
        else:
            print(cmd_converge(cfg))
    except (GenMonoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
