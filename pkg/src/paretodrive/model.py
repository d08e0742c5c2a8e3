"""EV longitudinal dynamics and battery model (surrogate realization).

Four ODE states (v, S, U_dL, U_dS) plus position, driven by a constant
wheel torque. The battery current follows from the state through the
terminal power balance; integration is fixed-step RK4 with in-step
interpolation at the horizon crossing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import HorizonNotReached, InfeasiblePower
from .params import ModelParams

DEFAULT_STEP = 0.01   # s
DEFAULT_T_CAP = 120.0  # s per 100 m horizon


@dataclass(frozen=True)
class VehicleState:
    """Vehicle + battery state at one instant."""

    v: float          # velocity, m/s
    S: float          # state of charge, fraction
    U_dL: float = 0.0  # long-term voltage drop, V
    U_dS: float = 0.0  # short-term voltage drop, V
    p: float = 0.0     # position, m
    t: float = 0.0     # time, s

    def as_array(self) -> np.ndarray:
        """(v, S, U_dL, U_dS, p) with p made relative by the caller."""
        return np.array([self.v, self.S, self.U_dL, self.U_dS, self.p])


@dataclass(frozen=True)
class TrajectorySample:
    state: VehicleState
    u: float   # wheel torque, N m
    I: float   # battery current, A


def resistive_force(v: float, params: ModelParams) -> float:
    """Driving resistance c0*[v>0] + c1*v + c2*v^2, N."""
    if v < 0:
        raise ValueError("resistive_force requires v >= 0")
    return _core.resistive_force(v, params.c0, params.c1, params.c2)


def battery_current(state: VehicleState, u: float, params: ModelParams) -> float:
    """Battery current for the given state and torque, A.

    Solves R0*I^2 - U_eff*I + P_batt = 0 for the physical (smaller |I|)
    root; sign(I) = sign(P_batt), positive discharging.
    """
    current, ok = _core.battery_current(
        state.v, state.S, state.U_dL, state.U_dS, u, params.as_array())
    if not ok:
        raise InfeasiblePower(
            f"power demand infeasible at v={state.v:.3f} m/s, u={u:.1f} N m")
    return current


def derivatives(state: VehicleState, u: float, params: ModelParams) -> np.ndarray:
    """Time derivatives (dv, dS, dU_dL, dU_dS, dp)."""
    dy, _, ok = _core.derivatives(state.as_array(), u, params.as_array())
    if not ok:
        raise InfeasiblePower(
            f"power demand infeasible at v={state.v:.3f} m/s, u={u:.1f} N m")
    return dy


def integrate_horizon(x0: VehicleState, u: float, p_f: float, params: ModelParams,
                      step: float = DEFAULT_STEP, t_cap: float = DEFAULT_T_CAP,
                      ) -> tuple[list[TrajectorySample], float]:
    """Integrate with constant torque until the vehicle has covered p_f metres.

    The final sample is interpolated inside the crossing step so that the
    covered distance matches p_f to within 1e-6 m. Returns the sampled
    trajectory and the crossing time t_f.
    """
    if p_f <= 0:
        raise ValueError("p_f must be positive")
    if step <= 0:
        raise ValueError("step must be positive")
    y0 = x0.as_array()
    p_offset = y0[4]
    y0[4] = 0.0
    n_max = int(t_cap / step) + 3
    out = np.empty((n_max, 7))
    status, t_end, _, _, n, _ = _core.simulate(
        y0, u, params.as_array(), step, t_cap, _core.MODE_DISTANCE, p_f,
        _core.CASE_NONE, 0.0, 0.0, 0.0, 0.0, 0.0, True, out)
    if status == _core.STATUS_POWER:
        raise InfeasiblePower(f"power demand infeasible during horizon, u={u:.1f} N m")
    if status != _core.STATUS_REACHED:
        raise HorizonNotReached(
            f"p_f={p_f} m not reached within {t_cap} s (u={u:.1f} N m)")
    samples = []
    for i in range(n):
        t, v, S, UdL, UdS, p, current = out[i]
        samples.append(TrajectorySample(
            state=VehicleState(v=v, S=S, U_dL=UdL, U_dS=UdS,
                               p=p + p_offset, t=x0.t + t),
            u=u, I=current))
    return samples, t_end
