"""Dynamic-programming reference: exactness, consistency, comparison."""

import math

import pytest

from paretodrive.controller import DriveLog, LogSample
from paretodrive.dp import (ComparisonReport, DpConfig, brute_force_dp,
                            check_bellman, compare, drive_energy, solve_dp,
                            _transition)
from paretodrive.errors import NoFeasiblePath, TrackMismatch
from paretodrive.pareto import ObjectivePoint
from paretodrive.params import KMH
from paretodrive.track import Segment, Track, comparison_track


def _flat(vmax=50.0, length=100.0):
    return Track(segments=(Segment(0.0, length, vmax),))


def test_single_transition_cost_by_hand(params):
    """One stage, 0 -> 9 m/s over 50 m, evaluated from the formulas."""
    dt, energy, total = _transition(0.0, 9.0, 50.0, params,
                                    DpConfig(stage_count=2))
    assert dt == pytest.approx(100.0 / 9.0)     # 2*50/(0+9)
    a = 81.0 / 100.0                            # (v2^2-v1^2)/(2 dp)
    f = params.m * a + (150.0 + 1.5 * 4.5 + 0.4 * 4.5**2)
    assert energy == pytest.approx(f * 50.0 / params.eta_drive)
    assert total == pytest.approx(dt + 6e-5 * energy)


def test_transition_rejects_torque_violation(params):
    # 0 -> 30 m/s over 10 m needs ~54 kN: far beyond the torque bound
    assert _transition(0.0, 30.0, 10.0, params, DpConfig()) is None


def test_solve_dp_refuses_stops(params):
    track = Track(segments=(Segment(0.0, 100.0, 50.0),), stops=(50.0,))
    with pytest.raises(NoFeasiblePath):
        solve_dp(track, params)


def test_solve_dp_matches_brute_force_small(params):
    """5 stages x 5 velocity nodes: backward induction equals enumeration."""
    track = _flat(vmax=10.0, length=50.0)
    config = DpConfig(stage_count=5, v_step=2.5, ramp_entry=0.0)
    solution = solve_dp(track, params, config)
    assert solution.cost == pytest.approx(
        brute_force_dp(track, params, config), abs=1e-12)


def test_bellman_consistency(params):
    config = DpConfig(stage_count=10, v_step=2.0)
    solution = solve_dp(_flat(vmax=30.0, length=200.0), params, config)
    assert check_bellman(solution, params) <= 1e-9


def test_beta_zero_is_time_optimal(params):
    """With no energy weight the profile accelerates as hard as allowed."""
    track = _flat(vmax=30.0, length=200.0)
    fast = solve_dp(track, params, DpConfig(stage_count=20, v_step=1.0, beta=0.0))
    slow = solve_dp(track, params, DpConfig(stage_count=20, v_step=1.0, beta=1e-3))
    assert fast.t_f <= slow.t_f + 1e-12
    assert fast.energy >= slow.energy - 1e-9


def test_beta_monotonicity(params):
    track = _flat(vmax=50.0, length=300.0)
    results = [solve_dp(track, params, DpConfig(stage_count=30, v_step=1.0,
                                                beta=b))
               for b in (0.0, 3e-5, 6e-5, 2e-4)]
    for a, b in zip(results, results[1:]):
        assert b.energy <= a.energy + 1e-9
        assert b.t_f >= a.t_f - 1e-12


def _profile_as_log(solution, params):
    """Replay the DP profile as a drive log: two rows per stage with the
    stage's constant force, so the trapezoid energy integral is exact
    (velocity is linear in time under constant acceleration)."""
    import numpy as np
    positions = np.linspace(0.0, solution.track.length,
                            solution.config.stage_count + 1)
    rows = []
    t = 0.0
    for k in range(solution.config.stage_count):
        v1, v2 = solution.profile[k], solution.profile[k + 1]
        dp = positions[k + 1] - positions[k]
        a = (v2 * v2 - v1 * v1) / (2.0 * dp)
        v_avg = 0.5 * (v1 + v2)
        force = params.m * a + (params.c0 + params.c1 * v_avg
                                + params.c2 * v_avg * v_avg)
        u = force * params.r
        rows.append(LogSample(t=t, p=float(positions[k]), v_kmh=v1 / KMH,
                              S=0.6, u=u, I=0.0, rho=0.5, scenario="dp"))
        t += 2.0 * dp / (v1 + v2)
        rows.append(LogSample(t=t, p=float(positions[k + 1]), v_kmh=v2 / KMH,
                              S=0.6, u=u, I=0.0, rho=0.5, scenario="dp"))
    return DriveLog(samples=rows, totals=ObjectivePoint(0.0, t))


def test_compare_self_gap_is_zero(params):
    """The DP profile replayed as a log scores its own cost.

    Velocity is linear in time within a stage, so the trapezoid energy
    integral is exact and the gap vanishes to rounding.
    """
    solution = solve_dp(_flat(vmax=30.0, length=200.0), params,
                        DpConfig(stage_count=20, v_step=1.0))
    log = _profile_as_log(solution, params)
    report = compare(log, solution, params)
    assert abs(report.gap) <= 1e-6


def test_compare_rejects_track_mismatch(params):
    solution = solve_dp(_flat(vmax=30.0, length=200.0), params,
                        DpConfig(stage_count=10, v_step=2.0))
    log = DriveLog(samples=[LogSample(0, 0, 0, 0.6, 0, 0, 0.5, "x"),
                            LogSample(10, 50, 10, 0.6, 0, 0, 0.5, "x")],
                   totals=ObjectivePoint(0.0, 10.0))
    with pytest.raises(TrackMismatch):
        compare(log, solution, params)


def test_drive_energy_sign_for_regen(params):
    rows = [LogSample(t=0.0, p=0.0, v_kmh=36.0, S=0.6, u=-100.0, I=0.0,
                      rho=0.5, scenario="x"),
            LogSample(t=1.0, p=10.0, v_kmh=34.0, S=0.6, u=-100.0, I=0.0,
                      rho=0.5, scenario="x")]
    log = DriveLog(samples=rows, totals=ObjectivePoint(0.0, 1.0))
    assert drive_energy(log, params) < 0


def test_report_serialization(params):
    solution = solve_dp(comparison_track(), params,
                        DpConfig(stage_count=20, v_step=1.0))
    log = _profile_as_log(solution, params)
    report = compare(log, solution, params)
    assert "gap" in report.table()
    assert report.csv().splitlines()[0] == "side,time_s,energy_J,cost"
