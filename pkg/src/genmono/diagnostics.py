"""Per-step, per-cell certificates for the generalized monotone scheme inequalities.

Every check reads a finished ``RunHistory`` and returns a ``DiagnosticReport``;
a failed inequality becomes a ``Violation`` rather than an exception.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EntropyPair, StateSnapshot
from .fluxes import entropy_fluxes, incremental_coefficients, muscl_reconstruct
from .paths import MAX, detect_extrema
from .report import DiagnosticReport, Violation, value_tolerance

NON_DECREASING, NON_INCREASING = "non-decreasing", "non-increasing"


@dataclass(frozen=True)
class MonotoneSegments:
    """Closed index intervals of one snapshot, alternately tagged.

    Neighbouring intervals share the extremum plateau that separates them.
    """

    n: int
    segments: tuple[tuple[int, int, str], ...]

    def cells(self, tag: str) -> np.ndarray:
        idx = [np.arange(a, b + 1) for a, b, t in self.segments if t == tag]
        return np.unique(np.concatenate(idx)) if idx else np.array([], dtype=int)


def classify_monotone_segments(s: StateSnapshot | np.ndarray, n: int = 0) -> MonotoneSegments:
    u = s.values if isinstance(s, StateSnapshot) else np.asarray(s, dtype=float)
    n = s.n if isinstance(s, StateSnapshot) else n
    ext = detect_extrema(u, n)
    last = len(u) - 1
    if not ext:
        tag = NON_DECREASING if u[-1] >= u[0] else NON_INCREASING
        return MonotoneSegments(n, ((0, last, tag),))
    segs = []
    start = 0
    for rec in ext:
        tag = NON_DECREASING if rec.kind == MAX else NON_INCREASING
        segs.append((start, rec.hi, tag))
        start = rec.lo
    tail = NON_INCREASING if ext[-1].kind == MAX else NON_DECREASING
    segs.append((start, last, tail))
    return MonotoneSegments(n, tuple(segs))


def _params(history, **extra):
    p = {"lambda": history.lam, "Q": history.config.Q if history.config.scheme == "lax_friedrichs" else None}
    p.update(extra)
    return p


def _pairs(history):
    snaps = history.snapshots
    for n in range(len(snaps) - 1):
        yield n, snaps[n].values, snaps[n + 1].values


def _extrema_counts(history):
    return [len(detect_extrema(s)) for s in history.snapshots]


def check_strong_max_principle(history, slack: float = 1e-12) -> DiagnosticReport:
    """1/2 min(d+, d-, 0) <= u^{n+1}_j - u^n_j <= 1/2 max(d+, d-, 0) at interior cells."""
    tol = value_tolerance(history, slack)
    v = []
    for n, u, un in _pairs(history):
        d_right = u[2:] - u[1:-1]
        d_left = u[:-2] - u[1:-1]
        zero = np.zeros_like(d_right)
        lo = 0.5 * np.minimum(np.minimum(d_right, d_left), zero)
        hi = 0.5 * np.maximum(np.maximum(d_right, d_left), zero)
        du = un[1:-1] - u[1:-1]
        for k in np.flatnonzero(du - hi > tol):
            v.append(Violation("strong_max_principle", n, int(k + 1), float(du[k]), float(hi[k]), float(du[k] - hi[k])))
        for k in np.flatnonzero(lo - du > tol):
            v.append(Violation("strong_max_principle", n, int(k + 1), float(lo[k]), float(du[k]), float(lo[k] - du[k])))
    return DiagnosticReport.from_violations("strong_max_principle", v, _params(history), _extrema_counts(history))


def check_quadratic_decay(history, alpha: float, slack: float = 1e-12) -> DiagnosticReport:
    """At each extremum cell: max drops by alpha*min(jump^2), min rises likewise.

    Jumps are to the immediate neighbours, so plateau cells (one jump zero)
    are checked but pass trivially.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    tol = value_tolerance(history, slack)
    v = []
    for n, u, un in _pairs(history):
        for rec in detect_extrema(u, n):
            sign = 1.0 if rec.kind == MAX else -1.0
            for j in range(rec.lo, rec.hi + 1):
                m = min((u[j] - u[j - 1]) ** 2, (u[j] - u[j + 1]) ** 2)
                bound = sign * u[j] - alpha * m
                lhs = sign * un[j]
                if lhs - bound > tol:
                    v.append(Violation("quadratic_decay", n, j, float(lhs), float(bound), float(lhs - bound)))
    return DiagnosticReport.from_violations(
        "quadratic_decay", v, _params(history, alpha=alpha), _extrema_counts(history)
    )


def check_linf_stability(history, slack: float = 1e-12) -> DiagnosticReport:
    tol = value_tolerance(history, slack)
    v = []
    for n, u, un in _pairs(history):
        lo, hi = u.min(), u.max()
        for j in np.flatnonzero(un - hi > tol):
            v.append(Violation("linf_stability", n, int(j), float(un[j]), float(hi), float(un[j] - hi)))
        for j in np.flatnonzero(lo - un > tol):
            v.append(Violation("linf_stability", n, int(j), float(lo), float(un[j]), float(lo - un[j])))
    return DiagnosticReport.from_violations("linf_stability", v, _params(history))


def check_tvd(history, slack: float = 1e-12) -> DiagnosticReport:
    tol = value_tolerance(history, slack)
    v = []
    for n, u, un in _pairs(history):
        tv0 = float(np.abs(np.diff(u)).sum())
        tv1 = float(np.abs(np.diff(un)).sum())
        if tv1 - tv0 > tol:
            v.append(Violation("tvd", n, -1, tv1, tv0, tv1 - tv0))
    return DiagnosticReport.from_violations("tvd", v, _params(history))


def entropy_residuals(history, pair: EntropyPair, n: int) -> np.ndarray | None:
    """U(u^{n+1}) - U(u^n) + lam (G_{j+1/2} - G_{j-1/2}) for every cell, or None."""
    u = history.snapshots[n].values
    un = history.snapshots[n + 1].values
    G = entropy_fluxes(u, history.fluxes[n], pair, history.flux, history.config, history.lam)
    if G is None:
        return None
    return pair.U(un) - pair.U(u) + history.lam * np.diff(G)


def check_cell_entropy(history, pair: EntropyPair, segs: list[MonotoneSegments] | None = None,
                       slack: float = 1e-10, all_cells: bool = False) -> DiagnosticReport:
    """Discrete entropy inequality on non-decreasing segments (extremum cells included).

    ``all_cells`` checks every cell instead, as monotone schemes allow.
    """
    params = _params(history)
    if history.steps and entropy_residuals(history, pair, 0) is None:
        return DiagnosticReport.skipped(
            "cell_entropy", f"{history.config.scheme} with Q={history.config.Q} has no numerical entropy flux", params
        )
    scale = max(1.0, float(np.max(np.abs(pair.U(history.array())))))
    tol = slack * scale
    v = []
    for n in range(history.steps):
        r = entropy_residuals(history, pair, n)
        if all_cells:
            cells = np.arange(len(r))
        else:
            seg = segs[n] if segs is not None else classify_monotone_segments(history.snapshots[n])
            cells = seg.cells(NON_DECREASING)
        for j in cells[r[cells] > tol]:
            v.append(Violation("cell_entropy", n, int(j), float(r[j]), 0.0, float(r[j])))
    return DiagnosticReport.from_violations("cell_entropy", v, params)


def check_incremental_conditions(history, sufficient: bool = False, slack: float = 1e-12) -> DiagnosticReport:
    """C+ >= 0, C- >= 0 and C+_{j+1/2} + C-_{j-1/2} <= 1/2 at interior cells.

    With ``sufficient`` the stronger per-face test C+- >= 0, Q <= 1/4 is used.
    """
    check = "incremental_sufficient" if sufficient else "incremental_conditions"
    f = history.flux
    v = []
    for n in range(history.steps):
        u = history.snapshots[n].values
        inc = incremental_coefficients(u, history.fluxes[n], history.lam, f)
        if sufficient:
            faces = range(1, len(u))
            for k in faces:
                for val in (inc.c_plus[k], inc.c_minus[k]):
                    if val < -slack:
                        v.append(Violation(check, n, k, 0.0, float(val), float(-val)))
                if inc.Q[k] - 0.25 > slack:
                    v.append(Violation(check, n, k, float(inc.Q[k]), 0.25, float(inc.Q[k] - 0.25)))
            continue
        for j in range(1, len(u) - 1):
            cp, cm = inc.c_plus[j + 1], inc.c_minus[j]
            if cp < -slack:
                v.append(Violation(check, n, j, 0.0, float(cp), float(-cp)))
            if cm < -slack:
                v.append(Violation(check, n, j, 0.0, float(cm), float(-cm)))
            if cp + cm - 0.5 > slack:
                v.append(Violation(check, n, j, float(cp + cm), 0.5, float(cp + cm - 0.5)))
    return DiagnosticReport.from_violations(check, v, _params(history))


def check_monotonicity_preserving(history, slack: float = 1e-12) -> DiagnosticReport:
    """Monotone stretches stay monotone one cell in from each end, and no
    extremum is created (the count of extrema never grows)."""
    tol = value_tolerance(history, slack)
    counts = _extrema_counts(history)
    v = []
    for n, u, un in _pairs(history):
        for a, b, tag in classify_monotone_segments(u, n).segments:
            inner = un[a + 1 : b]
            if len(inner) < 2:
                continue
            steps = np.diff(inner) if tag == NON_DECREASING else -np.diff(inner)
            for k in np.flatnonzero(steps < -tol):
                v.append(Violation("monotonicity_preserving", n, int(a + 2 + k), 0.0, float(steps[k]), float(-steps[k])))
        if counts[n + 1] > counts[n]:
            v.append(Violation("extremum_count", n, -1, counts[n + 1], counts[n], counts[n + 1] - counts[n]))
    return DiagnosticReport.from_violations("monotonicity_preserving", v, _params(history), counts)


def check_extremum_slopes(history) -> DiagnosticReport:
    """MUSCL: the reconstructed slope vanishes at every extremum cell."""
    v = []
    if history.config.scheme == "muscl":
        for s in history.snapshots[:-1]:
            slopes = muscl_reconstruct(s).slopes
            for rec in detect_extrema(s):
                for j in range(rec.lo, rec.hi + 1):
                    if slopes[j] != 0:
                        v.append(Violation("extremum_slopes", s.n, j, abs(float(slopes[j])), 0.0, abs(float(slopes[j]))))
    return DiagnosticReport.from_violations("extremum_slopes", v, _params(history))
