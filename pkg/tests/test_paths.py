import csv

import numpy as np
import pytest

from genmono import BURGERS, ZERO, GaussianBump, GridSpec, MatchingError, SchemeConfig, SmoothRamp, StateSnapshot, run
from genmono.paths import (
    MAX,
    MIN,
    PATHS_HEADER,
    ExtremumPath,
    ExtremumRecord,
    build_paths,
    check_oscillation_bound,
    check_path_structure,
    detect_extrema,
    hull_gap,
    match_extrema,
    paths_or_report,
    shift_path,
    write_paths_csv,
)
from genmono.stepper import RunHistory

from oracles import brute_extrema


def synthetic(*rows, lam=0.25):
    g = GridSpec.uniform(len(rows[0]), 0.0, 1.0, lam)
    snaps = tuple(StateSnapshot(n, np.asarray(r, dtype=float), g) for n, r in enumerate(rows))
    return RunHistory(snaps, SchemeConfig("godunov", lam=lam), BURGERS)


def annihilation_history():
    u = np.array([0] * 6 + [0.2, 0.1] + [0.3] * 30)
    return run(StateSnapshot(0, u, GridSpec.uniform(len(u), 0, 1)), SchemeConfig("godunov"), BURGERS, steps=20)


def gaussian_history():
    return run(GaussianBump(0.0, 0.1), SchemeConfig("godunov"), BURGERS, 1.5, grid=GridSpec.uniform(200, -1, 3))


# detection


def test_detect_examples():
    assert detect_extrema(np.arange(5.0)) == []
    (m,) = detect_extrema(np.array([0.0, 1, 0]))
    assert (m.kind, m.lo, m.hi, m.value, m.J) == (MAX, 1, 1, 1.0, 1)
    a, b = detect_extrema(np.array([0.0, 1, 1, 0, -1, -1, 0]))
    assert (a.kind, a.lo, a.hi, a.value) == (MAX, 1, 2, 1.0)
    assert (b.kind, b.lo, b.hi, b.value) == (MIN, 4, 5, -1.0)


def test_detect_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(300):
        u = rng.integers(0, 4, rng.integers(1, 15)).astype(float)
        got = [(r.kind, r.lo, r.hi, r.value) for r in detect_extrema(u)]
        assert got == brute_extrema(u)


def test_detected_kinds_alternate():
    rng = np.random.default_rng(1)
    for _ in range(100):
        kinds = [r.kind for r in detect_extrema(rng.normal(size=30))]
        assert all(a != b for a, b in zip(kinds, kinds[1:]))


# matching


def rec(kind, lo, hi, value, n=0):
    return ExtremumRecord(n, kind, lo, hi, value)


def test_hull_gap():
    assert hull_gap(rec(MAX, 3, 5, 1), rec(MAX, 6, 6, 1)) == 1
    assert hull_gap(rec(MAX, 3, 5, 1), rec(MAX, 4, 4, 1)) == 0
    assert hull_gap(rec(MAX, 3, 5, 1), rec(MAX, 0, 1, 1)) == 2


def test_match_shifted_spike():
    assert match_extrema([rec(MAX, 3, 3, 1.0)], [rec(MAX, 4, 4, 0.9, 1)]) == {0: 0}


def test_match_monotone_and_termination():
    assert match_extrema([], []) == {}
    assert match_extrema([rec(MAX, 3, 3, 1.0), rec(MIN, 4, 4, 0.5)], []) == {}


def test_match_rejects_growing_max_or_far_jump():
    with pytest.raises(MatchingError):
        match_extrema([rec(MAX, 3, 3, 1.0)], [rec(MAX, 3, 3, 1.1, 1)])
    with pytest.raises(MatchingError):
        match_extrema([rec(MAX, 3, 3, 1.0)], [rec(MAX, 5, 5, 0.9, 1)])


def test_match_skips_terminated_records():
    prev = [rec(MAX, 2, 2, 1.0), rec(MIN, 3, 3, 0.5), rec(MAX, 8, 8, 1.0)]
    assert match_extrema(prev, [rec(MAX, 9, 9, 0.8, 1)]) == {0: 2}


def test_annihilation_drops_both_extrema():
    hist = annihilation_history()
    counts = [len(detect_extrema(s)) for s in hist.snapshots]
    assert counts[0] == 2 and counts[-1] == 0
    n = counts.index(0)
    assert match_extrema(detect_extrema(hist.snapshots[n - 1]), detect_extrema(hist.snapshots[n])) == {}


# paths


def test_annihilating_pair_share_stopping_step():
    hist = annihilation_history()
    a, b = build_paths(hist)
    assert {a.kind, b.kind} == {MAX, MIN}
    assert a.stop == b.stop == a.last_step == b.last_step
    assert check_path_structure([a, b], hist).passed


def test_gaussian_single_max_path():
    hist = gaussian_history()
    (p,) = build_paths(hist)
    assert p.kind == MAX and p.stop is None and p.last_step == hist.steps
    assert check_path_structure([p], hist).passed


def test_monotone_data_has_no_paths():
    hist = run(SmoothRamp(-0.5, 0.5, -1, 1), SchemeConfig("godunov"), BURGERS, 0.2, grid=GridSpec.uniform(60, -4, 4))
    assert build_paths(hist) == []


def test_path_ids_parity():
    hist = annihilation_history()
    for p in build_paths(hist):
        assert p.q % 2 == (1 if p.kind == MAX else 0)


def test_lax_friedrichs_spike_fails_path_count():
    u = np.array([0, 0, 0, 1, 0, 0, 0.0])
    hist = run(StateSnapshot(0, u, GridSpec.uniform(7, 0, 1)), SchemeConfig("lax_friedrichs", lam=0.25), ZERO, steps=1)
    paths, rep = paths_or_report(hist)
    assert paths is None and rep.verdict == "fail"
    assert rep.violations[0].check == "path_count"


# shifts


def single_path(u):
    hist = synthetic(u)
    (p,) = build_paths(hist)
    return p, hist


def test_shift_symmetric_spike_ties_left():
    p, _ = single_path([0, 0, 1, 0, 0])
    assert p.eps == [0]


def test_shift_smaller_right_jump():
    p, _ = single_path([0, 0, 1, 0.9, 0.9])
    assert p.eps == [1] and p.shifted == [3]


def test_shift_plateau_representative():
    p, hist = single_path([0, 0, 1, 1, 1, 0, 0])
    assert p.J == [2] and p.eps == [1]
    q = ExtremumPath(p.q, p.kind, J=[3], w=[1.0])
    assert shift_path(q, hist).eps == [0]


# oscillation bound


def test_oscillation_constant_extremum_zero_jump():
    row = [0, 0, 1, 1, 1, 0, 0]
    hist = synthetic(row, row, row)
    (p,) = build_paths(hist)
    rep = check_oscillation_bound(p, hist, alpha=0.125)
    assert rep.passed and rep.params["beta"] == 0.125


def test_oscillation_frozen_extremum_fails():
    row = [0, 0, 1, 0, 0]
    hist = synthetic(row, row, row)
    (p,) = build_paths(hist)
    rep = check_oscillation_bound(p, hist, alpha=0.125)
    assert rep.verdict == "fail"
    assert max(v.margin for v in rep.violations) == pytest.approx(0.25)


def test_oscillation_beta_capped_at_half():
    hist = synthetic([0, 0, 1, 0, 0], [0, 0, 0.4, 0, 0])
    (p,) = build_paths(hist)
    rep = check_oscillation_bound(p, hist, alpha=2.0)
    assert rep.params["beta"] == 0.5 and rep.passed


def test_oscillation_min_path_mirrored():
    hist = synthetic([0, 0, -1, 0, 0], [0, 0, -1, 0, 0])
    (p,) = build_paths(hist)
    assert check_oscillation_bound(p, hist, alpha=0.1).verdict == "fail"


def test_oscillation_gaussian_run():
    hist = gaussian_history()
    (p,) = build_paths(hist)
    assert check_oscillation_bound(p, hist, alpha=hist.lam * BURGERS.convexity_floor / 2).passed


def test_oscillation_brute_windows():
    rng = np.random.default_rng(3)
    for _ in range(20):
        w = np.concatenate([[1.0], 1.0 - np.cumsum(rng.uniform(0, 0.05, 12))])
        rows = [[0, 0, x, 0.5, 0.5] for x in w]
        hist = synthetic(*rows)
        (p,) = build_paths(hist)
        alpha = 0.1
        rep = check_oscillation_bound(p, hist, alpha)
        terms = [min(abs(x - 0.5), (x - 0.5) ** 2) for x in w]
        bad = any(
            alpha * sum(terms[a:b]) > w[a] - w[b] + 1e-10 for a in range(len(w)) for b in range(a + 1, len(w))
        )
        assert rep.passed == (not bad)


# csv


def test_paths_csv(tmp_path):
    hist = annihilation_history()
    paths = build_paths(hist)
    out = write_paths_csv(paths, hist, tmp_path / "paths.csv")
    rows = list(csv.reader(out.open()))
    assert rows[0] == PATHS_HEADER == ["q", "kind", "n", "t", "J", "x", "w", "epsilon", "alive"]
    assert len(rows) == 1 + sum(len(p.J) for p in paths)
    first = rows[1]
    assert float(first[5]) == pytest.approx(hist.grid.x_min + (int(first[4]) + 0.5) * hist.grid.h)
    assert {r[8] for r in rows[1:]} == {"0", "1"}
