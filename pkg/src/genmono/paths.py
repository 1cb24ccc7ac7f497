"""Discrete paths of extrema through a run history.

Extrema are plateau-aware: a run of equal values strictly above (or below)
both outside neighbours counts once.  A newly seen plateau is represented by
its leftmost cell; along a path the representative is the plateau cell
nearest the previous one, so a one-cell hull move is a one-cell index move.
Path ids follow the convention that even ids track
minima and odd ids track maxima, so the data is non-decreasing between
path 2p and path 2p+1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import MatchingError, StateSnapshot
from .report import DiagnosticReport, Violation, value_tolerance

MAX, MIN = "max", "min"


@dataclass(frozen=True)
class ExtremumRecord:
    n: int
    kind: str
    lo: int  # plateau span [lo, hi]
    hi: int
    value: float

    @property
    def J(self) -> int:
        return self.lo


def _runs(u: np.ndarray):
    """Maximal runs of equal values as (start, end, value)."""
    if len(u) == 0:
        return []
    breaks = np.flatnonzero(u[1:] != u[:-1]) + 1
    starts = np.concatenate([[0], breaks])
    ends = np.concatenate([breaks - 1, [len(u) - 1]])
    return [(int(a), int(b), float(u[a])) for a, b in zip(starts, ends)]


def detect_extrema(s: StateSnapshot | np.ndarray, n: int | None = None) -> list[ExtremumRecord]:
    if isinstance(s, StateSnapshot):
        u, n = s.values, s.n if n is None else n
    else:
        u, n = np.asarray(s, dtype=float), n or 0
    runs = _runs(u)
    out = []
    for k in range(1, len(runs) - 1):
        a, b, v = runs[k]
        left, right = runs[k - 1][2], runs[k + 1][2]
        if v > left and v > right:
            out.append(ExtremumRecord(n, MAX, a, b, v))
        elif v < left and v < right:
            out.append(ExtremumRecord(n, MIN, a, b, v))
    return out


def hull_gap(a: ExtremumRecord, b: ExtremumRecord) -> int:
    return max(0, b.lo - a.hi, a.lo - b.hi)


def _compatible(p: ExtremumRecord, q: ExtremumRecord, tol: float) -> bool:
    if p.kind != q.kind or hull_gap(p, q) > 1:
        return False
    if p.kind == MAX:
        return q.value <= p.value + tol
    return q.value >= p.value - tol


def match_extrema(prev: Sequence[ExtremumRecord], nxt: Sequence[ExtremumRecord], tol: float = 1e-12) -> dict[int, int]:
    """Order-preserving injection of ``nxt`` into ``prev``.

    Returns ``{index in nxt: index in prev}``; prev records left out are
    terminated.  Greedy earliest matching finds an embedding whenever one
    exists, since any valid choice for a record can be moved left.
    """
    mapping: dict[int, int] = {}
    k = 0
    for i, q in enumerate(nxt):
        while k < len(prev) and not _compatible(prev[k], q, tol * max(1.0, abs(prev[k].value))):
            k += 1
        if k == len(prev):
            err = MatchingError(f"step {q.n}: {q.kind} at cells [{q.lo}, {q.hi}] has no admissible predecessor")
            err.n, err.counts = q.n, (len(prev), len(nxt))
            raise err
        mapping[i] = k
        k += 1
    return mapping


@dataclass
class ExtremumPath:
    q: int
    kind: str
    birth: int = 0
    stop: int | None = None  # last step with a node; None while alive at the end of the run
    J: list[int] = field(default_factory=list)
    lo: list[int] = field(default_factory=list)
    hi: list[int] = field(default_factory=list)
    w: list[float] = field(default_factory=list)
    eps: list[int] = field(default_factory=list)

    @property
    def steps(self) -> range:
        return range(self.birth, self.birth + len(self.J))

    @property
    def last_step(self) -> int:
        return self.birth + len(self.J) - 1

    @property
    def shifted(self) -> list[int]:
        return [j + e for j, e in zip(self.J, self.eps)]


def build_paths(history) -> list[ExtremumPath]:
    snaps = history.snapshots
    first = detect_extrema(snaps[0])
    if not first:
        return []
    q0 = 1 if first[0].kind == MAX else 0
    paths = []
    for i, rec in enumerate(first):
        p = ExtremumPath(q=q0 + i, kind=rec.kind)
        p.J.append(rec.J); p.lo.append(rec.lo); p.hi.append(rec.hi); p.w.append(rec.value)
        paths.append(p)

    alive = list(range(len(paths)))
    current = first
    for s in snaps[1:]:
        nxt = detect_extrema(s)
        mapping = match_extrema(current, nxt)
        matched_prev = set(mapping.values())
        for k, pid in enumerate(alive):
            if k not in matched_prev:
                paths[pid].stop = s.n - 1
        new_alive = []
        for i, rec in enumerate(nxt):
            pid = alive[mapping[i]]
            p = paths[pid]
            p.J.append(min(max(p.J[-1], rec.lo), rec.hi)); p.lo.append(rec.lo); p.hi.append(rec.hi); p.w.append(rec.value)
            new_alive.append(pid)
        alive, current = new_alive, nxt

    for p in paths:
        shift_path(p, history)
    return paths


def shift_path(path: ExtremumPath, history) -> ExtremumPath:
    """Fill the shifts: 0 if the jump to J-1 is the smaller one, 1 if the jump
    to J+1 is; ties (including plateau interiors) go left."""
    eps = []
    for n, J in zip(path.steps, path.J):
        u = history.snapshots[n].values
        left = abs(u[J - 1] - u[J])
        right = abs(u[J + 1] - u[J])
        eps.append(0 if left <= right else 1)
    path.eps = eps
    return path


def neighbour_jump(u: np.ndarray, J: int) -> float:
    """Smaller of the two immediate neighbour jumps at cell J."""
    return float(min(abs(u[J - 1] - u[J]), abs(u[J + 1] - u[J])))


def check_oscillation_bound(path: ExtremumPath, history, alpha: float, slack: float = 1e-10) -> DiagnosticReport:
    """beta * sum_{n-<=n<n+} min(|d_n|, d_n^2) <= w(n-) - w(n+) for all windows.

    Every window is tested at once through prefix sums: the worst window
    ending at n+ starts where ``prefix - drop`` is smallest.
    """
    beta = min(alpha, 0.5)
    sign = 1.0 if path.kind == MAX else -1.0
    terms = []
    for n, J in zip(path.steps, path.J):
        d = neighbour_jump(history.snapshots[n].values, J)
        terms.append(min(d, d * d))
    w = sign * np.asarray(path.w)
    prefix = np.concatenate([[0.0], np.cumsum(terms)])  # prefix[k] = sum of terms before node k
    violations = []
    m = len(w)
    # lhs(a, b) = beta*(prefix[b] - prefix[a]); rhs(a, b) = w[a] - w[b]
    # violation iff beta*prefix[b] + w[b] - (beta*prefix[a] + w[a]) > slack
    key = beta * prefix[:m] + w
    best_a = 0
    for b in range(1, m):
        if key[b - 1] < key[best_a]:
            best_a = b - 1
        margin = key[b] - key[best_a]
        if margin > slack:
            a = best_a
            lhs = beta * (prefix[b] - prefix[a])
            violations.append(
                Violation("oscillation_bound", path.birth + b, path.J[b], float(lhs), float(w[a] - w[b]), float(margin))
            )
    params = {"alpha": alpha, "beta": beta, "lambda": history.lam, "Q": history.config.Q}
    return DiagnosticReport.from_violations("oscillation_bound", violations, params,
                                            notes=[f"path q={path.q} ({path.kind})"])


def check_path_structure(paths: list[ExtremumPath], history, slack: float = 1e-12) -> DiagnosticReport:
    """Per-step path count, one-cell moves, value monotonicity, ordering, shifted moves."""
    v: list[Violation] = []
    steps = history.steps
    counts = [sum(1 for p in paths if n in p.steps) for n in range(steps + 1)]
    for n in range(steps):
        if counts[n + 1] > counts[n]:
            v.append(Violation("path_count", n + 1, -1, counts[n + 1], counts[n], counts[n + 1] - counts[n]))
    tol = value_tolerance(history, slack)
    for p in paths:
        sign = 1.0 if p.kind == MAX else -1.0
        sh = p.shifted
        for k in range(1, len(p.J)):
            n = p.birth + k
            move = abs(p.J[k] - p.J[k - 1])
            if move > 1:
                v.append(Violation("path_move", n, p.J[k], move, 1, move - 1))
            rise = sign * (p.w[k] - p.w[k - 1])
            if rise > tol:
                v.append(Violation("path_value", n, p.J[k], sign * p.w[k], sign * p.w[k - 1], rise))
            e = abs(sh[k] - sh[k - 1])
            if e > 1:
                v.append(Violation("shifted_move", n, sh[k], e, 1, e - 1))
    ordered = sorted(paths, key=lambda p: p.q)
    for a, b in zip(ordered, ordered[1:]):
        for n in set(a.steps) & set(b.steps):
            ja, jb = a.J[n - a.birth], b.J[n - b.birth]
            if ja > jb:
                v.append(Violation("path_order", n, ja, ja, jb, ja - jb))
    return DiagnosticReport.from_violations(
        "path_structure", v, {"lambda": history.lam, "Q": history.config.Q}, extrema_counts=counts
    )


def paths_or_report(history, slack: float = 1e-12) -> tuple[list[ExtremumPath] | None, DiagnosticReport]:
    """Build the paths and check their structure; a failed matching becomes a failing report."""
    try:
        paths = build_paths(history)
    except MatchingError as err:
        before, after = err.counts
        v = Violation("path_count", err.n, -1, after, before, after - before)
        rep = DiagnosticReport.from_violations("path_structure", [v], {"lambda": history.lam, "Q": history.config.Q},
                                               notes=[str(err)])
        return None, rep
    return paths, check_path_structure(paths, history, slack)


PATHS_HEADER = ["q", "kind", "n", "t", "J", "x", "w", "epsilon", "alive"]


def write_paths_csv(paths: list[ExtremumPath], history, path: Path) -> Path:
    grid = history.grid
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PATHS_HEADER)
        for p in sorted(paths, key=lambda p: p.q):
            for k, n in enumerate(p.steps):
                alive = int(p.stop is None or n < p.stop)
                x = grid.x_min + (p.J[k] + 0.5) * grid.h
                w.writerow([p.q, p.kind, n, repr(n * grid.tau), p.J[k], repr(x), repr(p.w[k]), p.eps[k], alive])
    return path
