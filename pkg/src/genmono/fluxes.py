"""Numerical fluxes, MUSCL reconstruction and incremental coefficients.

Interface arrays have length ``N + 1``: entry ``k`` is the flux through the
face between cells ``k - 1`` and ``k``.  The state is extended by two ghost
copies of each boundary value, which is exact under the constant-margin
discipline enforced by the stepper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import EntropyPair, FluxModel, SchemeConfig, SolverError, StateSnapshot

GHOSTS = 2
ZERO_JUMP = 1e-14


def minmod(a, b, c):
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    pos = (a > 0) & (b > 0) & (c > 0)
    neg = (a < 0) & (b < 0) & (c < 0)
    out = np.where(pos, np.minimum(np.minimum(a, b), c), 0.0)
    out = np.where(neg, np.maximum(np.maximum(a, b), c), out)
    return out if out.ndim else float(out)


def godunov_state(v, w, f: FluxModel):
    """R(0+; v, w): the Riemann solution sampled on the face."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    fv, fw = f.f(v), f.f(w)
    shock_left = fv > fw
    shock_state = np.where(shock_left, v, w)
    omega = f.omega
    fan_state = np.where(f.f_prime(v) >= 0, v, np.where(f.f_prime(w) <= 0, w, omega))
    out = np.where(v > w, shock_state, fan_state)
    return out if out.ndim else float(out)


def godunov_flux(v, w, f: FluxModel):
    """Exact Riemann flux for a convex f: min over [v, w] or max of the end values."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    fv, fw = f.f(v), f.f(w)
    omega = f.omega
    sonic_inside = (v <= omega) & (omega <= w)
    rare = np.where(sonic_inside, f.f(np.asarray(omega)), np.minimum(fv, fw))
    out = np.where(v <= w, rare, np.maximum(fv, fw))
    return out if out.ndim else float(out)


def lax_friedrichs_flux(v, w, f: FluxModel, Q: float, lam: float):
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    out = 0.5 * (f.f(v) + f.f(w)) - Q / (2.0 * lam) * (w - v)
    return out if out.ndim else float(out)


def engquist_osher_flux(v, w, f: FluxModel):
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    omega = f.omega
    out = f.f(np.maximum(v, omega)) + f.f(np.minimum(w, omega)) - f.f(np.asarray(omega))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# MUSCL


@dataclass(frozen=True, eq=False)
class Reconstruction:
    slopes: np.ndarray
    left_face: np.ndarray  # u_{j+1/2-} = u_j + s_j / 2
    right_face: np.ndarray  # u_{j+1/2+} = u_{j+1} - s_{j+1} / 2, length N - 1


def _slopes(u: np.ndarray) -> np.ndarray:
    s = np.zeros_like(u)
    s[1:-1] = minmod(u[1:-1] - u[:-2], 0.5 * (u[2:] - u[:-2]), u[2:] - u[1:-1])
    return s


def muscl_reconstruct(s: StateSnapshot | np.ndarray) -> Reconstruction:
    u = s.values if isinstance(s, StateSnapshot) else np.asarray(s, dtype=float)
    slopes = _slopes(u)
    return Reconstruction(slopes=slopes, left_face=u + 0.5 * slopes, right_face=u[1:] - 0.5 * slopes[1:])


def _newton_solve(u_side: float, slope: float, f: FluxModel, lam: float) -> float:
    c = 0.5 * lam * slope
    tol = 1e-13 * max(1.0, abs(u_side))

    def phi(v):
        return v + c * float(f.f_prime(v)) - u_side

    v = u_side
    for _ in range(50):
        r = phi(v)
        if abs(r) <= tol:
            return v
        d = 1.0 + c * float(f.f_second(v))
        if d <= 0:
            break
        v_new = v - r / d
        if not abs(v_new - u_side) <= abs(slope):
            break
        v = v_new

    lo, hi = u_side - abs(slope), u_side + abs(slope)
    plo, phi_hi = phi(lo), phi(hi)
    if plo > 0 or phi_hi < 0:
        raise SolverError(f"no interface root in [{lo}, {hi}]; CFL or slope bound violated")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pm = phi(mid)
        if abs(pm) <= tol or hi - lo <= 1e-16 * max(1.0, abs(mid)):
            return mid
        if pm < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def muscl_interface_solve(u_side, slope, f: FluxModel, lam: float):
    """Solve ``u_side = v + (lam/2) f'(v) slope`` for v."""
    u_side = np.asarray(u_side, dtype=float)
    slope = np.asarray(slope, dtype=float)
    if f.speed_affine is not None:
        a, b = f.speed_affine
        c = 0.5 * lam * slope
        out = (u_side - c * a) / (1.0 + c * b)
    else:
        u_b, s_b = np.broadcast_arrays(u_side, slope)
        out = np.array(
            [u if s == 0 else _newton_solve(u, s, f, lam) for u, s in zip(u_b.ravel(), s_b.ravel())]
        ).reshape(u_b.shape)
    return out if out.ndim else float(out)


def _muscl_cases(ul, ur, a_m, a_p, f: FluxModel):
    fp = f.f_prime
    c1 = (fp(a_m) >= 0) & (fp(ul) >= 0) & (fp(ur) >= 0)
    c2 = ~c1 & (fp(a_p) <= 0) & (fp(ul) <= 0) & (fp(ur) <= 0)
    return np.where(c1, 1, np.where(c2, 2, 3))


def _muscl_faces(ul, ur, sl, sr, f: FluxModel, lam: float):
    """Per-face case tag, upwind face value and characteristic foot value."""
    a_m = ul + 0.5 * sl
    a_p = ur - 0.5 * sr
    cases = _muscl_cases(ul, ur, a_m, a_p, f)
    side = np.where(cases == 1, a_m, np.where(cases == 2, a_p, 0.0))
    slope = np.where(cases == 1, sl, np.where(cases == 2, sr, 0.0))
    foot = np.where(cases == 3, 0.0, muscl_interface_solve(side, slope, f, lam))
    g_char = f.f(side) + f.f_prime(side) * (foot - side)
    g = np.where(cases == 3, godunov_flux(ul, ur, f), g_char)
    return g, cases, side, foot


def muscl_flux(j: int, rec: Reconstruction, s: StateSnapshot | np.ndarray, f: FluxModel, lam: float) -> float:
    """MUSCL flux through the face between cells j and j+1."""
    u = s.values if isinstance(s, StateSnapshot) else np.asarray(s, dtype=float)
    g, _, _, _ = _muscl_faces(
        np.array([u[j]]), np.array([u[j + 1]]), np.array([rec.slopes[j]]), np.array([rec.slopes[j + 1]]), f, lam
    )
    return float(g[0])


# ---------------------------------------------------------------------------
# Whole-state interface fluxes


@dataclass(frozen=True, eq=False)
class InterfaceFluxes:
    g: np.ndarray
    scheme: str
    cases: np.ndarray | None = None
    side: np.ndarray | None = None
    foot: np.ndarray | None = None


def _extend(u: np.ndarray) -> np.ndarray:
    return np.concatenate([np.full(GHOSTS, u[0]), u, np.full(GHOSTS, u[-1])])


def interface_fluxes(u: np.ndarray, cfg: SchemeConfig, f: FluxModel, lam: float) -> InterfaceFluxes:
    ue = _extend(np.asarray(u, dtype=float))
    ul, ur = ue[GHOSTS - 1 : -GHOSTS], ue[GHOSTS : -GHOSTS + 1]
    if cfg.scheme == "godunov":
        return InterfaceFluxes(godunov_flux(ul, ur, f), cfg.scheme)
    if cfg.scheme == "engquist_osher":
        return InterfaceFluxes(engquist_osher_flux(ul, ur, f), cfg.scheme)
    if cfg.scheme == "lax_friedrichs":
        return InterfaceFluxes(lax_friedrichs_flux(ul, ur, f, cfg.Q, lam), cfg.scheme)
    se = _slopes(ue)
    sl, sr = se[GHOSTS - 1 : -GHOSTS], se[GHOSTS : -GHOSTS + 1]
    g, cases, side, foot = _muscl_faces(ul, ur, sl, sr, f, lam)
    return InterfaceFluxes(g, cfg.scheme, cases, side, foot)


def entropy_fluxes(
    u: np.ndarray, fluxes: InterfaceFluxes, pair: EntropyPair, f: FluxModel, cfg: SchemeConfig, lam: float
) -> np.ndarray | None:
    """Numerical entropy flux on every face, or None if the scheme has none."""
    ue = _extend(np.asarray(u, dtype=float))
    ul, ur = ue[GHOSTS - 1 : -GHOSTS], ue[GHOSTS : -GHOSTS + 1]
    F, Up = pair.F, pair.U_prime
    if cfg.scheme == "godunov":
        return F(godunov_state(ul, ur, f))
    if cfg.scheme == "engquist_osher":
        omega = np.asarray(f.omega)
        return F(np.maximum(ul, omega)) + F(np.minimum(ur, omega)) - F(omega)
    if cfg.scheme == "lax_friedrichs":
        if cfg.Q > 0.25:
            return None
        return 0.5 * (F(ul) + F(ur)) - cfg.Q / (2.0 * lam) * (pair.U(ur) - pair.U(ul))
    cases, side, foot = fluxes.cases, fluxes.side, fluxes.foot
    G_char = F(side) + Up(side) * (f.f(foot) - f.f(side))
    return np.where(cases == 3, F(godunov_state(ul, ur, f)), G_char)


# ---------------------------------------------------------------------------
# Incremental form


@dataclass(frozen=True, eq=False)
class IncrementalForm:
    """Coefficients per face; ``c_plus[k]`` is C+ at the face k-1/2 seen from
    cell k-1, ``c_minus[k]`` is C- at the same face seen from cell k."""

    c_plus: np.ndarray
    c_minus: np.ndarray
    Q: np.ndarray

    def rebuild(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        ue = _extend(u)
        jump_right = ue[GHOSTS + 1 : -GHOSTS + 1] - u
        jump_left = ue[GHOSTS - 1 : -GHOSTS - 1] - u
        return u + self.c_plus[1:] * jump_right + self.c_minus[:-1] * jump_left


def incremental_coefficients(s: StateSnapshot | np.ndarray, g: InterfaceFluxes, lam: float, f: FluxModel) -> IncrementalForm:
    u = s.values if isinstance(s, StateSnapshot) else np.asarray(s, dtype=float)
    ue = _extend(u)
    ul, ur = ue[GHOSTS - 1 : -GHOSTS], ue[GHOSTS : -GHOSTS + 1]
    jump = ur - ul
    safe = np.abs(jump) >= ZERO_JUMP
    denom = np.where(safe, jump, 1.0)
    c_plus = np.where(safe, -lam * (g.g - f.f(ul)) / denom, 0.0)
    c_minus = np.where(safe, lam * (f.f(ur) - g.g) / denom, 0.0)
    return IncrementalForm(c_plus, c_minus, c_plus + c_minus)
