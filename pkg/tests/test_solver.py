"""Offline front tracing against the dense-grid oracle."""

import pytest

from paretodrive.errors import NoFeasibleControl
from paretodrive.pareto import is_mutually_nondominated
from paretodrive.scenarios import Case, Scenario
from paretodrive.solver import (Infeasible, SolverConfig, brute_force_front,
                                evaluate_objectives, front_consistency,
                                fronts_consistent, scalar_minimize,
                                solve_mocp)


def test_evaluate_objectives_feasible(params, solver_config):
    s = Scenario(Case.CONSTANT, 45.0, 50.0)
    point = evaluate_objectives(s, 80.0, params, solver_config)
    assert not isinstance(point, Infeasible)
    # 100 m at roughly 45 km/h = 12.5 m/s -> about 8 s
    assert 7.0 < point.J2 < 10.0
    assert point.J1 > 0


def test_evaluate_objectives_envelope_violation_is_a_value(params, solver_config):
    s = Scenario(Case.CONSTANT, 45.0, 50.0)
    result = evaluate_objectives(s, 400.0, params, solver_config)
    assert isinstance(result, Infeasible)


def test_scalar_minimize_ends_are_ordered(params, solver_config):
    s = Scenario(Case.CONSTANT, 45.0, 50.0)
    fast = scalar_minimize(s, 1, params, solver_config)
    efficient = scalar_minimize(s, 0, params, solver_config)
    assert fast.objectives.J2 < efficient.objectives.J2
    assert fast.objectives.J1 > efficient.objectives.J1


@pytest.mark.parametrize("scenario", [
    Scenario(Case.CONSTANT, 45.0, 50.0),
    Scenario(Case.ACCELERATE, 60.0, 100.0, 0.05),
    Scenario(Case.ACCELERATE, 0.0, 50.0, 0.1),
    Scenario(Case.DECELERATE, 60.0, 50.0, 0.2),
], ids=["constant", "accelerate-cruise", "accelerate-rest", "decelerate"])
def test_front_matches_oracle(scenario, params, solver_config):
    front = solve_mocp(scenario, params, solver_config)
    oracle = brute_force_front(scenario, params, solver_config, grid_size=2001)
    assert fronts_consistent(front, oracle, eps=1e-3)
    assert is_mutually_nondominated(front.entries)


def test_front_is_sorted_and_monotone(params, solver_config):
    front = solve_mocp(Scenario(Case.ACCELERATE, 60.0, 100.0, 0.05),
                       params, solver_config)
    j1 = [e.objectives.J1 for e in front.entries]
    j2 = [e.objectives.J2 for e in front.entries]
    assert j2 == sorted(j2)
    assert j1 == sorted(j1, reverse=True)
    assert 2 <= len(front.entries) <= solver_config.n_points + 1


def test_stop_front_rests_inside_window(params, solver_config):
    s = Scenario(Case.STOP, 40.0, 40.0, 0.5)
    front = solve_mocp(s, params, solver_config)
    assert len(front.entries) >= 1
    from paretodrive.solver import _stop_position
    for e in front.entries:
        rest = _stop_position(s, e.u, params, solver_config)
        assert s.p_stop - solver_config.stop_window <= rest <= s.p_stop + 1e-6


def test_infeasible_scenario_raises(params, solver_config):
    # a stop ramp too steep for the available braking torque
    s = Scenario(Case.STOP, 100.0, 100.0, 5.0)
    with pytest.raises(NoFeasibleControl):
        solve_mocp(s, params, solver_config)


def test_front_consistency_is_zero_against_itself(params, solver_config):
    front = solve_mocp(Scenario(Case.CONSTANT, 45.0, 50.0), params, solver_config)
    assert front_consistency(front, front) == 0.0


def test_decelerate_front_brakes(params, solver_config):
    front = solve_mocp(Scenario(Case.DECELERATE, 60.0, 50.0, 0.2),
                       params, solver_config)
    assert all(e.u < 0 for e in front.entries)
