"""Jitted numerical kernels: vehicle dynamics and fixed-step RK4 integration.

State vector layout: y = (v, S, U_dL, U_dS, p) with p relative to the start
of the horizon. Parameter array layout matches ModelParams.as_array().

Status codes returned by `simulate`:
    0  reached the target distance (interpolated final sample)
    1  vehicle came to rest (stop mode success)
    2  time cap hit before the target distance (horizon not reached)
    3  infeasible power demand (negative discriminant)
    4  velocity below the lower envelope
    5  velocity above the upper envelope
    6  battery current outside its bounds
"""

import numpy as np
from numba import njit

STATUS_REACHED = 0
STATUS_STOPPED = 1
STATUS_TIMEOUT = 2
STATUS_POWER = 3
STATUS_ENV_LOW = 4
STATUS_ENV_HIGH = 5
STATUS_CURRENT = 6

MODE_DISTANCE = 0   # integrate until relative position reaches p_f
MODE_TIME = 1       # integrate for a fixed duration, ignore p_f
MODE_STOP = 2       # integrate until the vehicle comes to rest

CASE_NONE = -1
CASE_CONSTANT = 0
CASE_ACCELERATE = 1
CASE_DECELERATE = 2
CASE_STOP = 3

V_EPS = 1e-3  # m/s: below this and decelerating counts as stopped


@njit(cache=True)
def resistive_force(v, c0, c1, c2):
    if v <= 0.0:
        return 0.0
    return c0 + c1 * v + c2 * v * v


@njit(cache=True)
def battery_current(v, S, UdL, UdS, u, par):
    """Physical root of R0*I^2 - U_eff*I + P_batt = 0. Returns (I, ok)."""
    r = par[1]
    p_wheel = (u / r) * max(v, 0.0)
    if p_wheel >= 0.0:
        p_batt = p_wheel / par[13]
    else:
        p_batt = par[14] * p_wheel
    u_eff = par[6] + par[7] * S - UdL - UdS
    disc = u_eff * u_eff - 4.0 * par[8] * p_batt
    if disc < 0.0:
        return 0.0, False
    return (u_eff - np.sqrt(disc)) / (2.0 * par[8]), True


@njit(cache=True)
def derivatives(y, u, par):
    """Returns (dy, I, ok)."""
    dy = np.empty(5)
    v = max(y[0], 0.0)
    current, ok = battery_current(v, y[1], y[2], y[3], u, par)
    if not ok:
        return dy, 0.0, False
    dv = (u / par[1] - resistive_force(v, par[2], par[3], par[4])) / par[0]
    if y[0] <= 1e-12 and dv < 0.0:
        dv = 0.0  # no reverse driving
    dy[0] = dv
    dy[1] = -current / (3600.0 * par[5])
    dy[2] = (par[9] * current - y[2]) / par[10]
    dy[3] = (par[11] * current - y[3]) / par[12]
    dy[4] = v
    return dy, current, True


@njit(cache=True)
def _envelope(case, p, v0, vlim, ramp, pstop):
    """Velocity corridor (lo, up) in m/s at relative position p."""
    if case == CASE_CONSTANT:
        return 0.8 * vlim, vlim
    if case == CASE_ACCELERATE:
        return min(v0 + ramp * p, 0.8 * vlim), vlim
    if case == CASE_DECELERATE:
        # No lower bound: a constant torque strong enough for the mandatory
        # initial ramp keeps braking once the limit is reached; re-planning
        # restores the corridor online.
        return 0.0, max(v0 - ramp * p, vlim)
    if case == CASE_STOP:
        # The stop ramp governs activation online; the path constraint here
        # is the speed limit only (a linear-in-p bound excludes every
        # finite-deceleration stopping trajectory near the sign).
        return 0.0, vlim
    return -1.0e30, 1.0e30


@njit(cache=True)
def _rk4_step(y, u, par, dt):
    """Returns (y_next, ok)."""
    k1, _, ok1 = derivatives(y, u, par)
    if not ok1:
        return y, False
    k2, _, ok2 = derivatives(y + 0.5 * dt * k1, u, par)
    if not ok2:
        return y, False
    k3, _, ok3 = derivatives(y + 0.5 * dt * k2, u, par)
    if not ok3:
        return y, False
    k4, _, ok4 = derivatives(y + dt * k3, u, par)
    if not ok4:
        return y, False
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if y_next[0] < 0.0:
        y_next[0] = 0.0
    return y_next, True


@njit(cache=True)
def simulate(y0, u, par, dt, t_cap, mode, p_f,
             case, v0e, vlime, rampe, pstope, tol_v,
             record, out):
    """Integrate with constant torque u.

    `out` rows are (t, v, S, U_dL, U_dS, p, I); filled only when `record`.
    Returns (status, t_end, y_end, I_end, n_recorded, p_viol).
    """
    y = y0.copy()
    t = 0.0
    n = 0
    current, ok = battery_current(max(y[0], 0.0), y[1], y[2], y[3], u, par)
    if not ok:
        return STATUS_POWER, t, y, 0.0, n, y[4]

    lo, up = _envelope(case, y[4], v0e, vlime, rampe, pstope)
    if y[0] > up + tol_v:
        return STATUS_ENV_HIGH, t, y, current, n, y[4]
    if y[0] < lo - tol_v:
        return STATUS_ENV_LOW, t, y, current, n, y[4]
    if current < par[15] or current > par[16]:
        return STATUS_CURRENT, t, y, current, n, y[4]

    if record:
        out[n, 0] = t
        out[n, 1:6] = y
        out[n, 6] = current
        n += 1

    while t < t_cap - 0.5 * dt:
        y_prev = y
        t_prev = t
        i_prev = current
        y, ok = _rk4_step(y, u, par, dt)
        if not ok:
            return STATUS_POWER, t_prev, y_prev, i_prev, n, y_prev[4]
        t = t_prev + dt
        current, ok = battery_current(max(y[0], 0.0), y[1], y[2], y[3], u, par)
        if not ok:
            return STATUS_POWER, t_prev, y_prev, i_prev, n, y_prev[4]

        if mode == MODE_DISTANCE and y[4] >= p_f:
            theta = (p_f - y_prev[4]) / (y[4] - y_prev[4])
            y_end = y_prev + theta * (y - y_prev)
            y_end[4] = p_f
            t_end = t_prev + theta * dt
            i_end = i_prev + theta * (current - i_prev)
            lo, up = _envelope(case, p_f, v0e, vlime, rampe, pstope)
            if y_end[0] > up + tol_v:
                return STATUS_ENV_HIGH, t_end, y_end, i_end, n, p_f
            if y_end[0] < lo - tol_v:
                return STATUS_ENV_LOW, t_end, y_end, i_end, n, p_f
            if record:
                out[n, 0] = t_end
                out[n, 1:6] = y_end
                out[n, 6] = i_end
                n += 1
            return STATUS_REACHED, t_end, y_end, i_end, n, p_f

        lo, up = _envelope(case, y[4], v0e, vlime, rampe, pstope)
        if y[0] > up + tol_v:
            return STATUS_ENV_HIGH, t, y, current, n, y[4]
        if y[0] < lo - tol_v:
            return STATUS_ENV_LOW, t, y, current, n, y[4]
        if current < par[15] or current > par[16]:
            return STATUS_CURRENT, t, y, current, n, y[4]

        if record:
            out[n, 0] = t
            out[n, 1:6] = y
            out[n, 6] = current
            n += 1

        if y[0] <= V_EPS:
            dy, _, _ = derivatives(y, u, par)
            if dy[0] <= 0.0:
                if mode == MODE_STOP:
                    return STATUS_STOPPED, t, y, current, n, y[4]
                if mode == MODE_DISTANCE:
                    return STATUS_TIMEOUT, t, y, current, n, y[4]

    if mode == MODE_TIME:
        return STATUS_REACHED, t, y, current, n, y[4]
    if mode == MODE_STOP:
        return STATUS_STOPPED if y[0] <= V_EPS else STATUS_TIMEOUT, t, y, current, n, y[4]
    return STATUS_TIMEOUT, t, y, current, n, y[4]


@njit(cache=True)
def sweep_objectives(y0, us, par, dt, t_cap, mode, p_f,
                     case, v0e, vlime, rampe, pstope, tol_v,
                     stop_window):
    """Evaluate (J1, J2) for many torque values at once.

    Returns (feasible flags, J1, J2, status codes). For stop-case scenarios
    feasibility additionally requires the rest position to fall within
    [pstop - stop_window, pstop].
    """
    n = us.shape[0]
    feas = np.zeros(n, dtype=np.bool_)
    j1 = np.empty(n)
    j2 = np.empty(n)
    stat = np.empty(n, dtype=np.int64)
    dummy = np.empty((1, 7))
    for i in range(n):
        status, t_end, y_end, _, _, _ = simulate(
            y0, us[i], par, dt, t_cap, mode, p_f,
            case, v0e, vlime, rampe, pstope, tol_v, False, dummy)
        stat[i] = status
        j1[i] = y0[1] - y_end[1]
        j2[i] = t_end
        if mode == MODE_STOP:
            if status == STATUS_STOPPED and pstope - stop_window <= y_end[4] <= pstope:
                feas[i] = True
        else:
            if status == STATUS_REACHED:
                feas[i] = True
    return feas, j1, j2, stat
