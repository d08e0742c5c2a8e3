"""Plant model: resistances, battery current, horizon integration."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paretodrive.errors import HorizonNotReached, InfeasiblePower
from paretodrive.model import (VehicleState, battery_current, derivatives,
                               integrate_horizon, resistive_force)
from paretodrive.params import ModelParams


def test_resistive_force_oracle(params):
    # 150 + 1.5*10 + 0.4*100 evaluated by hand
    assert resistive_force(10.0, params) == pytest.approx(205.0)


def test_resistive_force_zero_velocity_drops_static_term(params):
    assert resistive_force(0.0, params) == 0.0


def test_resistive_force_rejects_negative(params):
    with pytest.raises(ValueError):
        resistive_force(-1.0, params)


def test_battery_current_matches_quadratic_root(params):
    """Independent re-derivation of the current from the power balance."""
    state = VehicleState(v=10.0, S=0.6)
    u = 100.0
    current = battery_current(state, u, params)
    p_wheel = u / params.r * state.v
    p_batt = p_wheel / params.eta_drive
    u_eff = params.U_oc0 + params.U_oc1 * state.S
    expected = (u_eff - math.sqrt(u_eff**2 - 4 * params.R0 * p_batt)) / (2 * params.R0)
    assert current == pytest.approx(expected, rel=1e-12)
    assert current == pytest.approx(10.8005, abs=1e-3)


def test_battery_current_regen_uses_regen_efficiency(params):
    state = VehicleState(v=10.0, S=0.6)
    current = battery_current(state, -100.0, params)
    p_batt = params.eta_regen * (-100.0 / params.r * state.v)
    u_eff = params.U_oc0 + params.U_oc1 * state.S
    expected = (u_eff - math.sqrt(u_eff**2 - 4 * params.R0 * p_batt)) / (2 * params.R0)
    assert current < 0
    assert current == pytest.approx(expected, rel=1e-12)


def test_battery_current_infeasible_power(params):
    # required power beyond the parabola's maximum deliverable power
    small = ModelParams(R0=10.0)
    with pytest.raises(InfeasiblePower):
        battery_current(VehicleState(v=30.0, S=0.6), 400.0, small)


def test_derivatives_signs(params):
    dy = derivatives(VehicleState(v=10.0, S=0.6), 200.0, params)
    # accelerating: u/r = 667 N > 205 N resistance
    assert dy[0] > 0
    assert dy[1] < 0          # discharging
    assert dy[4] == pytest.approx(10.0)


def test_rc_voltage_relaxation(params):
    """With zero current demand the RC drops decay exponentially."""
    state = VehicleState(v=0.0, S=0.6, U_dL=1.0, U_dS=1.0)
    dy = derivatives(state, 0.0, params)
    assert dy[2] == pytest.approx(-1.0 / params.tau_L)
    assert dy[3] == pytest.approx(-1.0 / params.tau_S)


def test_integrate_horizon_reaches_exactly(params):
    samples, t_f = integrate_horizon(VehicleState(v=15.0, S=0.6), 100.0,
                                     100.0, params)
    assert samples[-1].state.p == pytest.approx(100.0, abs=1e-6)
    assert samples[-1].state.t == pytest.approx(t_f)
    assert t_f < 100.0 / 15.0 + 1.0


def test_integrate_horizon_convergence(params):
    """Quartic RK4 convergence: halving the step should shrink the
    end-time error by roughly 2^4."""
    x0 = VehicleState(v=10.0, S=0.6)
    t_ref = integrate_horizon(x0, 150.0, 100.0, params, step=0.00125)[1]
    e1 = abs(integrate_horizon(x0, 150.0, 100.0, params, step=0.04)[1] - t_ref)
    e2 = abs(integrate_horizon(x0, 150.0, 100.0, params, step=0.02)[1] - t_ref)
    assert e2 < e1
    assert e2 < 1e-6  # already tight at 20 ms steps


def test_integrate_horizon_position_offset_is_exact(params):
    a, t_a = integrate_horizon(VehicleState(v=12.0, S=0.6), 80.0, 100.0, params)
    b, t_b = integrate_horizon(VehicleState(v=12.0, S=0.6, p=500.0), 80.0,
                               100.0, params)
    assert t_a == t_b
    assert b[-1].state.p - a[-1].state.p == pytest.approx(500.0, abs=1e-9)
    assert b[-1].state.v == a[-1].state.v


def test_integrate_horizon_timeout(params):
    with pytest.raises(HorizonNotReached):
        integrate_horizon(VehicleState(v=0.0, S=0.6), 10.0, 100.0, params,
                          t_cap=5.0)


@given(u=st.floats(min_value=50.0, max_value=400.0),
       v0=st.floats(min_value=5.0, max_value=25.0))
@settings(max_examples=20, deadline=None)
def test_energy_sign_property(u, v0):
    """Driving torque always discharges; the charge drop matches the
    integral of I/(3600 Q) to integration accuracy."""
    params = ModelParams()
    samples, _ = integrate_horizon(VehicleState(v=v0, S=0.6), u, 100.0, params)
    assert all(s.I > 0 for s in samples[1:])
    ts = np.array([s.state.t for s in samples])
    cur = np.array([s.I for s in samples])
    charge_drop = np.trapezoid(cur, ts) / (3600.0 * params.Q)
    assert 0.6 - samples[-1].state.S == pytest.approx(charge_drop, rel=1e-4)
