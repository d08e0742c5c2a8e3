"""Online loop: classification, compromise selection, drives, logging."""

import pytest

from paretodrive.controller import (DriveLog, LogSample, MpcConfig,
                                    classify_scenario, fixed_rho,
                                    heuristic_rho, load_drive_log, mpc_step,
                                    road_envelope, run_drive, schedule_rho,
                                    select_compromise, stop_torque)
from paretodrive.errors import EmptyFront, FormatError
from paretodrive.model import VehicleState
from paretodrive.pareto import ObjectivePoint, ParetoEntry, ParetoSet
from paretodrive.params import KMH
from paretodrive.scenarios import Case
from paretodrive.track import Segment, Track, demo_track


@pytest.fixture(scope="module")
def config():
    return MpcConfig()


def _flat(vmax=50.0, length=1000.0, stops=()):
    return Track(segments=(Segment(0.0, length, vmax),), stops=stops)


# --- classification ------------------------------------------------------

def test_classify_inside_corridor_is_constant(config):
    choice = classify_scenario(_flat(), 100.0, 45.0, config)
    assert choice.case is Case.CONSTANT
    assert choice.v_lim == 50.0


def test_classify_below_corridor_accelerates(config):
    choice = classify_scenario(_flat(), 100.0, 30.0, config)
    assert choice.case is Case.ACCELERATE
    assert choice.ramp == config.ramp_accel


def test_classify_rising_limit_accelerates(config):
    track = Track(segments=(Segment(0, 500, 50.0), Segment(500, 1000, 70.0)))
    choice = classify_scenario(track, 460.0, 48.0, config)
    assert choice.case is Case.ACCELERATE


def test_classify_overspeed_decelerates(config):
    choice = classify_scenario(_flat(), 100.0, 60.0, config)
    assert choice.case is Case.DECELERATE
    assert choice.v_lim == 50.0


def test_classify_limit_drop_when_ramp_binds(config):
    track = Track(segments=(Segment(0, 500, 50.0), Segment(500, 1000, 30.0)))
    # 60 m ahead of the boundary: ramp allows 30 + 0.2*(60-20) = 38
    choice = classify_scenario(track, 440.0, 45.0, config)
    assert choice.case is Case.DECELERATE
    assert choice.v_lim == 30.0


def test_classify_stop_has_priority(config):
    track = Track(segments=(Segment(0, 500, 50.0), Segment(500, 1000, 30.0)),
                  stops=(480.0,))
    choice = classify_scenario(track, 440.0, 45.0, config)
    assert choice.case is Case.STOP
    assert choice.stop_distance == pytest.approx(40.0)


def test_classify_cleared_stop_is_ignored(config):
    track = _flat(stops=(300.0,))
    choice = classify_scenario(track, 290.0, 40.0, config,
                               cleared=frozenset({300.0}))
    assert choice.case is not Case.STOP


# --- road envelope and compromise ----------------------------------------

def test_road_envelope_minimum_of_events(config):
    track = Track(segments=(Segment(0, 500, 50.0), Segment(500, 1000, 30.0)),
                  stops=(400.0,))
    # stop ramp: 0.5*(400-300) = 50 exactly at the segment limit;
    # drop ramp: 30 + 0.2*200 = 70 -> not binding
    assert road_envelope(track, 300.0, frozenset(), config) == pytest.approx(50.0)
    assert road_envelope(track, 380.0, frozenset(), config) == pytest.approx(10.0)


def _front(points):
    entries = [ParetoEntry(u=float(i), objectives=ObjectivePoint(j1, j2))
               for i, (j1, j2) in enumerate(points)]
    j1s = [p[0] for p in points]
    j2s = [p[1] for p in points]
    return ParetoSet(entries=entries, utopia=(min(j1s), min(j2s)),
                     nadir=(max(j1s), max(j2s)))


def test_select_compromise_extremes():
    front = _front([(1.0, 0.0), (0.4, 0.4), (0.0, 1.0)])
    assert select_compromise(front, 1.0).objectives.J2 == 0.0
    assert select_compromise(front, 0.0).objectives.J1 == 0.0


def test_select_compromise_middle_point():
    # hand-evaluated: at rho=0.5 the middle scores 0.4 < 0.5 of the ends
    front = _front([(1.0, 0.0), (0.4, 0.4), (0.0, 1.0)])
    assert select_compromise(front, 0.5).objectives == ObjectivePoint(0.4, 0.4)


def test_select_compromise_empty_front():
    with pytest.raises(EmptyFront):
        select_compromise(ParetoSet(entries=[]), 0.5)


# --- stop braking --------------------------------------------------------

def test_stop_torque_places_rest_point(params, config):
    from paretodrive.controller import _rest_position
    state = VehicleState(v=40.0 * KMH, S=0.6)
    u = stop_torque(state, 80.0, params, config)
    rest = _rest_position(state, u, params, config)
    assert 79.8 <= rest <= 80.0


def test_stop_torque_saturates_when_too_close(params, config):
    state = VehicleState(v=50.0 * KMH, S=0.6)
    assert stop_torque(state, 1.0, params, config) == params.u_min


# --- full drives ---------------------------------------------------------

def test_mpc_step_advances_one_sample(demo_library, params, config):
    state = VehicleState(v=45.0 * KMH, S=0.6)
    result = mpc_step(state, _flat(), 0.5, demo_library, params, config)
    assert result.state.p == pytest.approx(config.delta, abs=1e-6)
    assert result.front is not None
    assert result.front.entries[result.selected].u == result.u


def test_drive_keeps_corridor_after_entry(demo_library, params, config):
    track = _flat(length=600.0)
    log = run_drive(track, 0.5, demo_library, params, config)
    entered = False
    for s in log.samples:
        if s.v_kmh >= 0.8 * 50.0:
            entered = True
        if entered:
            assert s.v_kmh <= 50.0 + config.corridor_tol
    assert entered


def test_drive_stops_at_sign(demo_library, params, config):
    track = _flat(length=400.0, stops=(250.0,))
    log = run_drive(track, 0.5, demo_library, params, config)
    rest = [s for s in log.samples if s.v_kmh == 0.0 and s.p > 1.0]
    assert rest
    assert abs(rest[0].p - 250.0) <= config.stop_tol


def test_drive_log_totals_consistent(demo_library, params, config):
    log = run_drive(_flat(length=300.0), 1.0, demo_library, params, config)
    assert log.totals.J2 == pytest.approx(log.samples[-1].t)
    assert log.totals.J1 == pytest.approx(
        log.samples[0].S - log.samples[-1].S, abs=1e-12)
    ps = [s.p for s in log.samples]
    assert all(b >= a for a, b in zip(ps, ps[1:]))


def test_drive_is_deterministic(demo_library, params, config):
    a = run_drive(_flat(length=300.0), 0.5, demo_library, params, config)
    b = run_drive(_flat(length=300.0), 0.5, demo_library, params, config)
    assert a.to_csv() == b.to_csv()


def test_feedback_perturbation_recovers(demo_library, params, config):
    """A velocity nudge mid-drive replans and still finishes safely."""
    track = _flat(length=600.0)

    def observe(state, step_index):
        if step_index == 10:
            return VehicleState(v=state.v + 1.0 * KMH, S=state.S,
                                U_dL=state.U_dL, U_dS=state.U_dS,
                                p=state.p, t=state.t)
        return state

    base = run_drive(track, 0.5, demo_library, params, config)
    perturbed = run_drive(track, 0.5, demo_library, params, config,
                          observe=observe)
    assert perturbed.samples[-1].p == pytest.approx(600.0, abs=1e-3)
    over = max(s.v_kmh - 50.0 for s in perturbed.samples)
    assert over <= config.corridor_tol
    # early controls identical, later ones replanned
    assert perturbed.samples[10].u == base.samples[10].u


def test_schedule_rho_bookkeeping(demo_library, params, config):
    track = _flat(length=300.0)
    log = run_drive(track, schedule_rho([(0.0, 0.0), (100.0, 0.5),
                                         (200.0, 1.0)]), demo_library,
                    params, config)
    for s in log.samples:
        if s.p < 100.0:
            assert s.rho == 0.0
    assert log.samples[-1].rho == 1.0


def test_heuristic_rho_branches(config):
    track = _flat()
    assert heuristic_rho(VehicleState(v=0.0, S=0.6), track, config) == \
        pytest.approx(config.rho_hi)
    assert heuristic_rho(VehicleState(v=50.0 * KMH, S=0.6), track, config) == \
        pytest.approx(config.rho_lo)


def test_heuristic_rho_ramps_down_before_stop(config):
    track = _flat(stops=(500.0,))
    # 60 m before the stop with a 100 m window: 40% of the way down
    v = 0.0  # base rho = rho_hi
    rho = heuristic_rho(VehicleState(v=v, S=0.6, p=440.0), track, config)
    expected = config.rho_hi + 0.4 * (config.rho_lo - config.rho_hi)
    assert rho == pytest.approx(expected)


def test_fixed_rho_validation():
    with pytest.raises(ValueError):
        fixed_rho(1.5)


# --- log persistence -----------------------------------------------------

def test_drive_log_csv_roundtrip(demo_library, params, config, tmp_path):
    log = run_drive(_flat(length=200.0), 0.5, demo_library, params, config)
    path = tmp_path / "log.csv"
    log.save(path)
    again = load_drive_log(path)
    assert len(again.samples) == len(log.samples)
    assert again.samples[0].scenario == log.samples[0].scenario
    assert again.totals.J2 == pytest.approx(log.totals.J2, abs=1e-3)


def test_load_drive_log_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(FormatError) as exc:
        load_drive_log(path)
    assert exc.value.line == 1


def test_load_drive_log_names_bad_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,p,v_kmh,S,u,I,rho,scenario\n"
                    "0,0,0,0.6,0,0,0.5,x\n"
                    "1,nope,0,0.6,0,0,0.5,x,extra\n")
    with pytest.raises(FormatError) as exc:
        load_drive_log(path)
    assert exc.value.line == 3
