import numpy as np
import pytest

from genmono import (
    BURGERS,
    ZERO,
    BoundaryReached,
    CFLViolation,
    GridSpec,
    RejectedInput,
    RiemannStep,
    SchemeConfig,
    StateSnapshot,
    run,
    step,
)
from genmono.stepper import write_snapshots
from genmono.suite import random_bv_state

from oracles import naive_godunov_burgers


def snap(values, lam, x_min=0.0, x_max=1.0):
    values = np.asarray(values, dtype=float)
    return StateSnapshot(0, values, GridSpec.uniform(len(values), x_min, x_max, lam))


def test_zero_flux_godunov_is_stationary():
    s = snap([0, 0, 0.3, 1.0, -0.5, 0, 0], 0.25)
    out = step(s, SchemeConfig("godunov"), ZERO)
    np.testing.assert_array_equal(out.values, s.values)
    assert out.n == 1


def test_lax_friedrichs_spike_counterexample():
    s = snap([0, 0, 0, 1, 0, 0, 0], 0.25)
    out = step(s, SchemeConfig("lax_friedrichs", Q=1.0), ZERO)
    np.testing.assert_array_equal(out.values, [0, 0, 0.5, 0, 0.5, 0, 0])


def test_godunov_hand_evaluated_maximum():
    s = snap([0.5, 0.5, 0.5, 1.0, 0.8, 0.8, 0.8], 0.25)
    out = step(s, SchemeConfig("godunov"), BURGERS)
    assert out.values[3] == pytest.approx(1 - 0.25 * (0.5 - 0.125), abs=1e-15)
    assert out.values[3] == 0.90625


def test_godunov_matches_naive_loop():
    s = random_bv_state(3)
    hist = run(s, SchemeConfig("godunov"), BURGERS, steps=25)
    np.testing.assert_array_equal(hist.final.values, naive_godunov_burgers(s.values, hist.lam, 25))


def test_cfl_violation_is_rejected():
    s = snap([0, 0, 1.0, 2.0, 0, 0], 0.2)  # 0.2 * 2 > 1/4
    with pytest.raises(CFLViolation):
        step(s, SchemeConfig("muscl"), BURGERS)


def test_non_constant_margins_rejected():
    s = snap([0, 1, 1, 1, 0, 0], 0.1)
    with pytest.raises(RejectedInput):
        step(s, SchemeConfig("godunov"), BURGERS)


def test_wave_reaching_margin_raises():
    s = snap([0, 0, 1, 0, 0], 0.2)
    with pytest.raises(BoundaryReached):
        step(s, SchemeConfig("godunov"), BURGERS)


def test_run_zero_time_and_constant_data():
    g = GridSpec.uniform(20, -1, 1)
    hist = run(RiemannStep(0.3, 0.3), SchemeConfig("godunov"), BURGERS, 0.0, grid=g)
    assert hist.steps == 0 and len(hist.snapshots) == 1
    hist = run(RiemannStep(0.3, 0.3), SchemeConfig("godunov"), BURGERS, 0.5, grid=g)
    for s in hist.snapshots:
        np.testing.assert_array_equal(s.values, 0.3)


def test_run_step_count_and_lambda():
    g = GridSpec.uniform(40, -1, 1)
    hist = run(RiemannStep(1.0, -1.0), SchemeConfig("godunov"), BURGERS, 0.3, grid=g)
    assert hist.lam == pytest.approx(0.25)
    assert hist.steps == int(np.ceil(0.3 / (0.25 * 0.05) - 1e-9))
    assert hist.grid.lam == hist.lam and hist.config.lam == hist.lam


def test_exact_multiple_of_tau_not_rounded_up():
    g = GridSpec.uniform(40, -1, 1)
    hist = run(RiemannStep(1.0, -1.0), SchemeConfig("godunov", lam=0.2), BURGERS, 7 * 0.2 * 0.05, grid=g)
    assert hist.steps == 7


def test_negative_time_rejected():
    with pytest.raises(RejectedInput):
        run(RiemannStep(1.0, -1.0), SchemeConfig("godunov"), BURGERS, -1.0, grid=GridSpec.uniform(10, -1, 1))


def test_stationary_shock_stays_put():
    g = GridSpec.uniform(100, -2, 2)
    hist = run(RiemannStep(1.0, -1.0), SchemeConfig("godunov"), BURGERS, 1.0, grid=g)
    x = g.centers
    for s in hist.snapshots:
        crossing = np.flatnonzero(np.diff(np.sign(s.values)))
        pos = x[crossing] if len(crossing) else x[np.argmin(np.abs(s.values))]
        assert np.all(np.abs(pos) <= g.h)


@pytest.mark.parametrize("scheme", ["godunov", "engquist_osher", "muscl", "lax_friedrichs"])
def test_conservation(scheme):
    s = random_bv_state(5)
    hist = run(s, SchemeConfig(scheme, Q=0.25), BURGERS, steps=30)
    mass = [s.grid.h * np.sum(x.values) for x in hist.snapshots]
    np.testing.assert_allclose(mass, mass[0], atol=1e-12 * s.grid.N)


def test_runs_are_deterministic():
    s = random_bv_state(11)
    a = run(s, SchemeConfig("muscl"), BURGERS, steps=20).array()
    b = run(s, SchemeConfig("muscl"), BURGERS, steps=20).array()
    assert a.tobytes() == b.tobytes()


def test_write_snapshots_layouts(tmp_path):
    g = GridSpec.uniform(20, -1, 1)
    hist = run(RiemannStep(1.0, 0.0), SchemeConfig("godunov"), BURGERS, grid=g, steps=2)
    (long,) = write_snapshots(hist, tmp_path / "long")
    lines = long.read_text().splitlines()
    assert lines[0] == "n,t,x,u" and len(lines) == 1 + 3 * 20
    split = write_snapshots(hist, tmp_path / "split", layout="split")
    assert [p.name for p in split] == ["snapshot_000000.csv", "snapshot_000001.csv", "snapshot_000002.csv"]
    assert split[0].read_text().splitlines()[0] == "t,x,u"
    with pytest.raises(ValueError):
        write_snapshots(hist, tmp_path / "x", layout="wide")
