"""Domain types shared by every module: fluxes, grids, states, entropy pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, interpolate

SAMPLE_POINTS = 1024


class GenMonoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GenMonoError):
    pass


class RejectedInput(GenMonoError):
    pass


class CFLViolation(GenMonoError):
    pass


class BoundaryReached(GenMonoError):
    """A wave reached the constant margin cells; the domain must be enlarged."""


class SolverError(GenMonoError):
    pass


class MatchingError(GenMonoError):
    pass


class GridMismatch(GenMonoError, ValueError):
    pass


# ---------------------------------------------------------------------------
# Flux models


@dataclass(frozen=True)
class FluxModel:
    """A convex flux with its first two derivatives.

    ``speed_affine`` is set when ``f'(u) = a + b*u``; it unlocks closed
    forms in the MUSCL interface solve and in the Riemann fan.
    """

    name: str
    f: Callable
    f_prime: Callable
    f_second: Callable
    sonic_point: float | None
    convexity_floor: float
    working_range: tuple[float, float]
    speed_affine: tuple[float, float] | None = None

    @property
    def omega(self) -> float:
        return 0.0 if self.sonic_point is None else self.sonic_point

    @property
    def strictly_convex(self) -> bool:
        return self.convexity_floor > 0

    def max_abs_speed(self, lo: float, hi: float) -> float:
        # f' is monotone, so |f'| peaks at an endpoint of [lo, hi].
        return float(max(abs(self.f_prime(lo)), abs(self.f_prime(hi))))

    def validate(self) -> None:
        """Sample-check convexity, monotone speed and the sonic point."""
        lo, hi = self.working_range
        u = np.linspace(lo, hi, SAMPLE_POINTS)
        if not self.strictly_convex:
            raise ConfigError(f"flux {self.name!r} is not strictly convex")
        if np.any(self.f_second(u) < self.convexity_floor * (1 - 1e-12)):
            raise ConfigError(f"flux {self.name!r}: f'' drops below the declared floor")
        if np.any(np.diff(self.f_prime(u)) <= 0):
            raise ConfigError(f"flux {self.name!r}: f' is not strictly increasing")
        if self.sonic_point is not None:
            if abs(float(self.f_prime(self.sonic_point))) > 1e-12:
                raise ConfigError(f"flux {self.name!r}: f'(omega) != 0")
            if not lo <= self.sonic_point <= hi:
                speeds = self.f_prime(u)
                if not (np.all(speeds > 0) or np.all(speeds < 0)):
                    raise ConfigError(f"flux {self.name!r}: sonic point outside range")


def _as_float(u):
    return np.asarray(u, dtype=float) * 1.0


BURGERS = FluxModel(
    name="burgers",
    f=lambda u: 0.5 * _as_float(u) ** 2,
    f_prime=lambda u: _as_float(u),
    f_second=lambda u: np.ones_like(_as_float(u)),
    sonic_point=0.0,
    convexity_floor=1.0,
    working_range=(-10.0, 10.0),
    speed_affine=(0.0, 1.0),
)

SHIFTED_BURGERS = FluxModel(
    name="shifted_burgers",
    f=lambda u: 0.5 * (_as_float(u) - 1.0) ** 2,
    f_prime=lambda u: _as_float(u) - 1.0,
    f_second=lambda u: np.ones_like(_as_float(u)),
    sonic_point=1.0,
    convexity_floor=1.0,
    working_range=(-9.0, 11.0),
    speed_affine=(-1.0, 1.0),
)

# u^4/4 degenerates at 0, so the working range is kept away from the sonic point.
QUARTIC = FluxModel(
    name="quartic",
    f=lambda u: 0.25 * _as_float(u) ** 4,
    f_prime=lambda u: _as_float(u) ** 3,
    f_second=lambda u: 3.0 * _as_float(u) ** 2,
    sonic_point=0.0,
    convexity_floor=0.75,
    working_range=(0.5, 2.0),
)

ZERO = FluxModel(
    name="zero",
    f=lambda u: 0.0 * _as_float(u),
    f_prime=lambda u: 0.0 * _as_float(u),
    f_second=lambda u: 0.0 * _as_float(u),
    sonic_point=0.0,
    convexity_floor=0.0,
    working_range=(-10.0, 10.0),
    speed_affine=(0.0, 0.0),
)

FLUXES = {m.name: m for m in (BURGERS, SHIFTED_BURGERS, QUARTIC, ZERO)}


def get_flux(name: str) -> FluxModel:
    try:
        return FLUXES[name]
    except KeyError:
        raise ConfigError(f"unknown flux {name!r}; choose from {sorted(FLUXES)}") from None


# ---------------------------------------------------------------------------
# Grid and state


@dataclass(frozen=True)
class GridSpec:
    N: int
    h: float
    x_min: float
    lam: float

    def __post_init__(self):
        if self.N < 5:
            raise ConfigError("need at least 5 cells")
        if not self.h > 0:
            raise ConfigError("cell width must be positive")

    @classmethod
    def uniform(cls, N: int, x_min: float, x_max: float, lam: float = 1.0) -> GridSpec:
        return cls(N=int(N), h=(x_max - x_min) / N, x_min=float(x_min), lam=float(lam))

    @property
    def tau(self) -> float:
        return self.lam * self.h

    @property
    def x_max(self) -> float:
        return self.x_min + self.N * self.h

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.N) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.N + 1) * self.h

    def with_lambda(self, lam: float) -> GridSpec:
        return GridSpec(self.N, self.h, self.x_min, float(lam))

    def refined(self, r: int) -> GridSpec:
        return GridSpec(self.N * r, self.h / r, self.x_min, self.lam)


@dataclass(frozen=True, eq=False)
class StateSnapshot:
    n: int
    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.N,):
            raise RejectedInput(f"expected {self.grid.N} values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise RejectedInput("state contains non-finite values")

    @property
    def t(self) -> float:
        return self.n * self.grid.tau

    def margins_constant(self) -> bool:
        u = self.values
        return u[0] == u[1] and u[-1] == u[-2]


def total_variation(s: StateSnapshot | np.ndarray) -> float:
    u = s.values if isinstance(s, StateSnapshot) else np.asarray(s)
    return float(np.sum(np.abs(np.diff(u))))


def sup_speed(f: FluxModel, s: StateSnapshot | np.ndarray) -> float:
    u = s.values if isinstance(s, StateSnapshot) else np.asarray(s)
    return f.max_abs_speed(float(u.min()), float(u.max()))


# ---------------------------------------------------------------------------
# Initial data presets


@dataclass(frozen=True)
class RiemannStep:
    left: float
    right: float
    x0: float = 0.0

    def __call__(self, x):
        return np.where(np.asarray(x) < self.x0, self.left, self.right)

    def cell_averages(self, grid: GridSpec) -> np.ndarray:
        a, b = grid.faces[:-1], grid.faces[1:]
        frac_left = np.clip((self.x0 - a) / grid.h, 0.0, 1.0)
        out = frac_left * self.left + (1.0 - frac_left) * self.right
        out[frac_left == 1.0] = self.left
        out[frac_left == 0.0] = self.right
        return out


@dataclass(frozen=True)
class PiecewiseAffine:
    """Linear interpolation between (x, u) breakpoints, constant outside.

    A repeated x coordinate encodes a jump.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(u)) for x, u in self.points)
        if len(pts) < 1:
            raise RejectedInput("piecewise-affine data needs at least one breakpoint")
        xs = [p[0] for p in pts]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise RejectedInput("breakpoints must be sorted by x")
        if not all(math.isfinite(v) for p in pts for v in p):
            raise RejectedInput("non-finite breakpoint")
        object.__setattr__(self, "points", pts)

    def _pieces(self):
        # (x_start, x_end, u_start, u_end), covering the real line
        pts = self.points
        yield (-math.inf, pts[0][0], pts[0][1], pts[0][1])
        for (xa, ua), (xb, ub) in zip(pts, pts[1:]):
            if xb > xa:
                yield (xa, xb, ua, ub)
        yield (pts[-1][0], math.inf, pts[-1][1], pts[-1][1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for xa, xb, ua, ub in self._pieces():
            m = (x >= xa) & (x < xb)
            if math.isinf(xa) or math.isinf(xb):
                out[m] = ua
            else:
                out[m] = ua + (ub - ua) * (x[m] - xa) / (xb - xa)
        return out

    def cell_averages(self, grid: GridSpec) -> np.ndarray:
        out = np.zeros(grid.N)
        faces = grid.faces
        for j in range(grid.N):
            a, b = faces[j], faces[j + 1]
            total = 0.0
            single = None
            for xa, xb, ua, ub in self._pieces():
                lo, hi = max(a, xa), min(b, xb)
                if hi <= lo:
                    continue
                if math.isinf(xa) or math.isinf(xb) or ua == ub:
                    mid_val = ua
                else:
                    mid = 0.5 * (lo + hi)
                    mid_val = ua + (ub - ua) * (mid - xa) / (xb - xa)
                if lo == a and hi == b:
                    single = mid_val
                total += mid_val * (hi - lo)
            out[j] = single if single is not None else total / (b - a)
        return out


@dataclass(frozen=True)
class GaussianBump:
    """Gaussian cut to ``base`` beyond ``cutoff`` widths, so margins are exactly constant."""

    center: float = 0.0
    width: float = 0.1
    amplitude: float = 1.0
    base: float = 0.0
    cutoff: float = 6.0

    def __call__(self, x):
        r = (np.asarray(x, dtype=float) - self.center) / self.width
        return self.base + np.where(np.abs(r) <= self.cutoff, self.amplitude * np.exp(-(r**2)), 0.0)


@dataclass(frozen=True)
class SumOfBumps:
    bumps: tuple[GaussianBump, ...]
    base: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.base)
        for b in self.bumps:
            out = out + b(x) - b.base
        return out


@dataclass(frozen=True)
class SmoothRamp:
    """Monotone C^3 transition from ``lo`` (x <= a) to ``hi`` (x >= b)."""

    lo: float
    hi: float
    a: float
    b: float

    def __call__(self, x):
        s = np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)
        p = s**4 * (35.0 - 84.0 * s + 70.0 * s**2 - 20.0 * s**3)
        return self.lo + (self.hi - self.lo) * p


def project_initial(u0, grid: GridSpec) -> StateSnapshot:
    """Cell averages of ``u0`` over every cell of ``grid``.

    Step and piecewise-affine presets integrate in closed form; anything else
    goes through adaptive quadrature of ``u0 - u0(midpoint)`` so that data
    constant on a cell reproduces that constant exactly.
    """
    if isinstance(u0, StateSnapshot):
        return StateSnapshot(0, u0.values, grid)
    if hasattr(u0, "cell_averages"):
        return StateSnapshot(0, u0.cell_averages(grid), grid)
    if not callable(u0):
        arr = np.asarray(u0, dtype=float)
        return StateSnapshot(0, arr, grid)

    probe = np.linspace(grid.x_min, grid.x_max, 8 * grid.N + 1)
    if not np.all(np.isfinite(np.asarray(u0(probe), dtype=float))):
        raise RejectedInput("initial data has non-finite samples")

    h = grid.h
    faces = grid.faces
    out = np.empty(grid.N)
    for j in range(grid.N):
        a, b = faces[j], faces[j + 1]
        mid = float(u0(np.array([0.5 * (a + b)]))[0])
        val, _ = integrate.quad(
            lambda x: float(u0(np.array([x]))[0]) - mid, a, b, epsabs=1e-12 * h, epsrel=0.0, limit=200
        )
        out[j] = mid + val / h
    return StateSnapshot(0, out, grid)


# ---------------------------------------------------------------------------
# Entropy pairs


@dataclass(frozen=True)
class EntropyPair:
    U: Callable
    U_prime: Callable
    F: Callable
    U_second: Callable | None = None
    name: str = ""

    def check(self, f: FluxModel, samples: int = 64) -> float:
        """Largest relative error between a centred difference of F and U'f'."""
        lo, hi = f.working_range
        u = np.linspace(lo, hi, samples)[1:-1]
        eps = 1e-6 * max(1.0, hi - lo)
        fd = (self.F(u + eps) - self.F(u - eps)) / (2 * eps)
        exact = self.U_prime(u) * f.f_prime(u)
        scale = np.maximum(1.0, np.abs(exact))
        return float(np.max(np.abs(fd - exact) / scale))


SQUARE = (lambda u: 0.5 * _as_float(u) ** 2, lambda u: _as_float(u), lambda u: np.ones_like(_as_float(u)))


def derive_entropy_flux(f: FluxModel, U=None, nodes: int = 2049) -> EntropyPair:
    """Build F with F' = U' f' and F(omega) = 0.

    ``U`` is a ``(U, U', U'')`` triple; ``None`` means U(u) = u^2/2.
    For Burgers with the square entropy the result is the closed form u^3/3.
    Otherwise F is tabulated by adaptive quadrature between nodes and
    interpolated with cubic Hermite splines that use the exact derivative.
    """
    if U is None:
        U = SQUARE
    U_fn, U_p, U_pp = U
    if f.name == "burgers" and U is SQUARE:
        return EntropyPair(U_fn, U_p, lambda u: _as_float(u) ** 3 / 3.0, U_pp, name="square")

    lo, hi = f.working_range
    omega = f.omega
    lo, hi = min(lo, omega), max(hi, omega)
    xs = np.linspace(lo, hi, nodes)

    def integrand(s):
        return float(U_p(s) * f.f_prime(s))

    steps = np.empty(nodes - 1)
    for k in range(nodes - 1):
        val, err = integrate.quad(integrand, xs[k], xs[k + 1], epsabs=1e-14, epsrel=1e-13)
        if not math.isfinite(val):
            raise ConfigError("entropy flux quadrature failed")
        steps[k] = val
    cum = np.concatenate([[0.0], np.cumsum(steps)])
    spline = interpolate.CubicHermiteSpline(xs, cum, U_p(xs) * f.f_prime(xs))
    offset = float(spline(omega))

    def F(u):
        return spline(_as_float(u)) - offset

    return EntropyPair(U_fn, U_p, F, U_pp, name="derived")


# ---------------------------------------------------------------------------
# Scheme configuration

SCHEMES = ("godunov", "lax_friedrichs", "engquist_osher", "muscl")


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "godunov"
    Q: float = 1.0
    lam: float | None = None
    cfl_target: float = 0.25

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not 0 < self.cfl_target <= 0.25:
            raise ConfigError("cfl_target must lie in (0, 1/4]")
        if self.scheme == "lax_friedrichs" and not 0 < self.Q <= 1:
            raise ConfigError("Q must lie in (0, 1]")
        if self.lam is not None and not self.lam > 0:
            raise ConfigError("lambda must be positive")

    @property
    def enforces_cfl(self) -> bool:
        return self.scheme in ("godunov", "muscl")
