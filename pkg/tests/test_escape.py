import math
import warnings

import numpy as np
import pytest

from polybilliards.dynamics import ParticleState, trace
from polybilliards.ensemble import EnsembleConfig, initial_conditions
from polybilliards.escape import (
    EscapeRecord,
    EscapeRecords,
    EscapeStatus,
    SurvivalCurve,
    WideOpeningWarning,
    crossover_m_alpha,
    default_survival_grid,
    mean_escape_time,
    opening_for_escape_time,
    run_open,
    survival_curve,
)
from polybilliards.geometry import Circle, GeometryError, Polygon, build_table, make_opening, opening_at


def _records(times, survivors=0, t_max=20.0):
    recs = [EscapeRecord(i, EscapeStatus.ESCAPED, float(t)) for i, t in enumerate(times)]
    recs += [EscapeRecord(len(recs) + j, EscapeStatus.SURVIVED, t_max) for j in range(survivors)]
    return recs


class TestSurvivalCurve:
    def test_all_escaped(self):
        c = survival_curve(_records([1, 2, 3]), [5.0])
        assert c.S.tolist() == [1.0, 0.0] and c.N.tolist() == [3, 0]

    def test_none_escaped(self):
        c = survival_curve(_records([], survivors=4), [1.0, 10.0])
        assert c.S.tolist() == [1.0, 1.0, 1.0]

    def test_half_escaped(self):
        c = survival_curve(_records(range(1, 11)), [5.5])
        assert c.S[1] == 0.5

    def test_escape_at_grid_point_counts_as_gone(self):
        c = survival_curve(_records([2.0, 4.0]), [2.0])
        assert c.N.tolist() == [2, 1]

    def test_flagged_excluded(self):
        recs = _records([1.0], survivors=1) + [EscapeRecord(9, EscapeStatus.FLAGGED, math.nan)]
        c = survival_curve(recs, [2.0])
        assert c.N.tolist() == [2, 1]

    def test_rejects_empty_and_bad_grid(self):
        with pytest.raises(ValueError):
            survival_curve([], [1.0])
        with pytest.raises(ValueError):
            survival_curve(_records([1.0]), [2.0, 1.0])

    def test_csv_round_trip(self, tmp_path):
        c = survival_curve(_records([1, 2, 3], survivors=1), [0.5, 1.5, 2.5])
        c.to_csv(tmp_path / "s.csv")
        assert (tmp_path / "s.csv").read_text().splitlines()[0] == "t,N,S"
        back = SurvivalCurve.from_csv(tmp_path / "s.csv")
        np.testing.assert_array_equal(back.t, c.t)
        np.testing.assert_array_equal(back.N, c.N)


class TestMeanEscapeTime:
    def test_circle(self, circle):
        assert mean_escape_time(circle, 0.05) == pytest.approx(math.pi**2 / 0.05, rel=1e-13)
        assert mean_escape_time(circle, 0.05) == pytest.approx(197.392, abs=1e-3)

    def test_polygon_composition(self):
        t = build_table(Polygon(64))
        expect = (math.pi / 2) * math.cos(math.pi / 64) * 128 * math.sin(math.pi / 64) / 0.2
        assert mean_escape_time(t, 0.2) == pytest.approx(expect, rel=1e-13)

    def test_scaling_and_inverse(self, pentagon):
        assert mean_escape_time(pentagon, 0.02) == pytest.approx(mean_escape_time(pentagon, 0.01) / 2)
        w = opening_for_escape_time(pentagon, 300.0)
        assert mean_escape_time(pentagon, w) == pytest.approx(300.0)

    def test_width_limits(self, circle):
        for w in (0.0, circle.perimeter):
            with pytest.raises(GeometryError):
                mean_escape_time(circle, w)


class TestCrossover:
    def test_values(self):
        assert crossover_m_alpha(1.0, 0.05).nearest == 126
        assert crossover_m_alpha(1.0, 0.05).value == pytest.approx(125.66, abs=0.01)
        assert crossover_m_alpha(1.0, 0.2).nearest == 31

    def test_degenerate(self):
        assert crossover_m_alpha(1.0, 2 * math.pi).degenerate
        assert not crossover_m_alpha(1.0, 1.0).degenerate
        with pytest.raises(ValueError):
            crossover_m_alpha(1.0, 7.0)


def test_width_checks(circle):
    with pytest.raises(GeometryError):
        run_open(circle, opening_at(circle, 0.0, circle.perimeter / 5), EnsembleConfig(10, 1, 10.0))
    with pytest.warns(WideOpeningWarning):
        run_open(circle, opening_at(circle, 0.0, 0.2), EnsembleConfig(10, 1, 10.0))


def test_initial_escape_rate_matches_mean_escape_time():
    # for t << tau_e the escaped fraction is t / tau_e
    for spec, width in ((Circle(), 0.05), (Polygon(8), 0.05)):
        table = build_table(spec)
        tau_e = mean_escape_time(table, width)
        n = 20_000
        rec = run_open(table, make_opening(table, width), EnsembleConfig(n, 7, 0.05 * tau_e))
        frac = 1.0 - survival_curve(rec, [0.05 * tau_e]).S[1]
        assert abs(frac - 0.05) < 4 * math.sqrt(0.05 / n)


def test_escape_times_are_collision_times(square):
    op = make_opening(square, 0.05)
    cfg = EnsembleConfig(40, 3, 400.0)
    rec = run_open(square, op, cfg)
    x, y, th = initial_conditions(square, cfg.n_particles, cfg.seed)
    checked = 0
    for i in np.flatnonzero(rec.escaped)[:10]:
        st = ParticleState.from_angle(x[i], y[i], th[i])
        t_esc = rec.escape_time[i]
        events, _ = trace(square, st, 10_000)
        times = np.array([e.time for e in events])
        j = int(np.argmin(np.abs(times - t_esc)))
        assert times[j] == pytest.approx(t_esc, rel=1e-9)
        assert op.contains_s(events[j].s)
        assert not any(op.contains_s(e.s) for e in events[:j])
        checked += 1
    assert checked > 0


def test_survival_independent_of_opening_position(circle):
    w = 0.05
    tau_e = mean_escape_time(circle, w)
    cfg = EnsembleConfig(4000, 5, 3 * tau_e)
    grid = [0.5 * tau_e, tau_e, 2 * tau_e]
    s0 = survival_curve(run_open(circle, opening_at(circle, 0.0, w), cfg), grid).S
    s1 = survival_curve(run_open(circle, opening_at(circle, circle.perimeter / 3, w), cfg), grid).S
    se = np.sqrt(s0 * (1 - s0) / cfg.n_particles)
    assert np.all(np.abs(s0 - s1) < 5 * np.sqrt(2) * se + 1e-12)


def test_curve_monotone_and_counts_survivors(pentagon):
    w = 0.03
    tau_e = mean_escape_time(pentagon, w)
    cfg = EnsembleConfig(2000, 8, 5 * tau_e)
    rec = run_open(pentagon, make_opening(pentagon, w, "vertex:2"), cfg)
    c = survival_curve(rec, default_survival_grid(tau_e, cfg.t_max))
    assert np.all(np.diff(c.S) <= 0)
    survivors = sum(r.status == EscapeStatus.SURVIVED for r in rec)
    assert c.N[-1] == survivors
    assert c.S[-1] * rec.usable == survivors


def test_escape_records_csv(tmp_path, circle):
    rec = run_open(circle, make_opening(circle, 0.05), EnsembleConfig(30, 2, 100.0))
    rec.to_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "particle,escape_time"
    assert len(lines) == 31
    empty = sum(1 for ln in lines[1:] if ln.endswith(","))
    assert empty == int((rec.status == 0).sum())
