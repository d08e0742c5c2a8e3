"""Online receding-horizon loop.

Every sample distance (20 m by default) the controller classifies the
active scenario from the track, fetches the matching Pareto set from the
library (rounding the measured velocity up, the safe side), picks the
compromise for the current preference weight, and applies that constant
torque for one sample distance.

Stop signs are handled with an activation ramp: braking starts when the
ramp through the sign descends to the current velocity. The braking
torque itself is found by bisection on the plant model, because a
velocity-quantized library cannot place the rest point within the
required 0.2 m of the sign. A safety governor additionally trims any
selected torque that would carry the vehicle above the road's allowed
velocity profile before the next re-plan.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import _core
from .errors import EmptyFront, FormatError, StallDetected
from .library import Library, LookupResult
from .model import VehicleState
from .pareto import ObjectivePoint, ParetoEntry, ParetoSet
from .params import KMH, ModelParams
from .scenarios import Case
from .track import Track


@dataclass(frozen=True)
class MpcConfig:
    p_f: float = 100.0           # prediction horizon distance, m
    delta: float = 20.0          # sample distance, m
    lookahead: float = 100.0     # event detection range, m
    ramp_accel: float = 0.1      # (km/h)/m, library accelerate ramp
    ramp_decel: float = 0.2      # (km/h)/m, deceleration toward lower limits
    ramp_stop: float = 0.5       # (km/h)/m, stop-approach activation ramp
    corridor_tol: float = 0.5    # km/h, accepted overshoot above v_max
    stop_tol: float = 0.2        # m, required rest accuracy at stop signs
    dwell: float = 0.0           # s, wait at a stop sign
    creep_margin: float = 30.0   # N m above breakaway for the final approach
    integrator_step: float = 0.01
    soc0: float = 0.6
    # preference heuristic
    rho_hi: float = 0.9
    rho_lo: float = 0.2
    v_lo: float = 0.3            # fraction of v_lim below which rho = rho_hi
    v_hi: float = 0.9            # fraction of v_lim above which rho = rho_lo
    braking_window: float = 100.0  # m, rho ramp-down before braking events

    def __post_init__(self):
        if not 0 < self.delta <= self.p_f:
            raise ValueError("sample distance must lie in (0, p_f]")


@dataclass(frozen=True)
class ScenarioChoice:
    case: Case
    v_lim: float            # km/h
    ramp: float             # (km/h)/m
    stop_distance: float | None = None  # m, set for stop handling


@dataclass(frozen=True)
class LogSample:
    t: float
    p: float
    v_kmh: float
    S: float
    u: float
    I: float
    rho: float
    scenario: str


@dataclass
class DriveLog:
    samples: list[LogSample]
    totals: ObjectivePoint
    clamped_lookups: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "p", "v_kmh", "S", "u", "I", "rho", "scenario"])
        for s in self.samples:
            writer.writerow([f"{s.t:.4f}", f"{s.p:.6f}", f"{s.v_kmh:.6f}",
                             f"{s.S:.9f}", f"{s.u:.4f}", f"{s.I:.4f}",
                             f"{s.rho:.4f}", s.scenario])
        return buf.getvalue()

    def save(self, path):
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def load_drive_log(path) -> DriveLog:
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["t", "p", "v_kmh", "S", "u", "I", "rho", "scenario"]:
        raise FormatError("bad drive log header", line=1)
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 8:
            raise FormatError("wrong column count", line=lineno)
        try:
            samples.append(LogSample(t=float(row[0]), p=float(row[1]),
                                     v_kmh=float(row[2]), S=float(row[3]),
                                     u=float(row[4]), I=float(row[5]),
                                     rho=float(row[6]), scenario=row[7]))
        except ValueError:
            raise FormatError("bad numeric field", line=lineno) from None
    if not samples:
        raise FormatError("empty drive log", line=2)
    totals = ObjectivePoint(J1=samples[0].S - samples[-1].S, J2=samples[-1].t)
    return DriveLog(samples=samples, totals=totals)


def road_envelope(track: Track, p: float, cleared: frozenset,
                  config: MpcConfig) -> float:
    """Allowed velocity (km/h) at position p: segment limit capped by the
    deceleration ramps into future limit drops and stop signs."""
    allowed = track.v_max_at(p)
    for q, limit in track.limit_drops():
        if p <= q:
            allowed = min(allowed, limit + config.ramp_decel * (q - p))
    for s in track.stops_ahead(p, cleared):
        allowed = min(allowed, config.ramp_stop * (s - p))
    return allowed


def classify_scenario(track: Track, p: float, v_kmh: float, config: MpcConfig,
                      cleared: frozenset = frozenset()) -> ScenarioChoice:
    """Scenario for the current state. Priority: stop > decelerate >
    accelerate > constant velocity."""
    v_max = track.v_max_at(p)
    stops = track.stops_ahead(p, cleared)
    if stops:
        d = stops[0] - p
        # braking becomes active one sample early so the required
        # deceleration stays within the activation ramp
        if v_kmh >= config.ramp_stop * (d - config.delta) - 1e-9:
            return ScenarioChoice(Case.STOP, v_max, config.ramp_stop, stop_distance=d)
    for q, limit in track.limit_drops():
        d = q - p
        if 0 <= d and v_kmh >= limit + config.ramp_decel * max(d - config.delta, 0.0) - 1e-9:
            return ScenarioChoice(Case.DECELERATE, limit, config.ramp_decel)
    if v_kmh > v_max + 0.01:
        return ScenarioChoice(Case.DECELERATE, v_max, config.ramp_decel)
    for a, b in zip(track.segments, track.segments[1:]):
        d = b.start - p
        if (b.v_max > a.v_max and 0 <= d <= config.lookahead
                and v_kmh < 0.8 * b.v_max - 1e-9):
            return ScenarioChoice(Case.ACCELERATE, b.v_max, config.ramp_accel)
    if v_kmh < 0.8 * v_max - 1e-9:
        return ScenarioChoice(Case.ACCELERATE, v_max, config.ramp_accel)
    return ScenarioChoice(Case.CONSTANT, v_max, 0.0)


def select_compromise(front: ParetoSet, rho: float) -> ParetoEntry:
    """Entry minimizing rho*J2 + (1-rho)*J1 in per-front min-max
    normalized objectives; ties break toward smaller J2."""
    if not front.entries:
        raise EmptyFront("cannot select from an empty front")
    j1 = np.array([e.objectives.J1 for e in front.entries])
    j2 = np.array([e.objectives.J2 for e in front.entries])
    n1 = (j1 - j1.min()) / max(j1.max() - j1.min(), 1e-15)
    n2 = (j2 - j2.min()) / max(j2.max() - j2.min(), 1e-15)
    score = rho * n2 + (1.0 - rho) * n1
    order = sorted(range(len(score)), key=lambda i: (score[i], j2[i]))
    return front.entries[order[0]]


# --- plant integration helpers -------------------------------------------

def _integrate(state: VehicleState, u: float, params: ModelParams,
               config: MpcConfig, mode: int, distance: float = 0.0,
               t_cap: float = 240.0):
    """Run the plant with constant torque; returns (status, samples, end state).

    samples columns: t, v, S, U_dL, U_dS, p (absolute), I.
    """
    y0 = state.as_array()
    y0[4] = 0.0
    n_max = int(t_cap / config.integrator_step) + 3
    out = np.empty((n_max, 7))
    status, t_end, y_end, i_end, n, _ = _core.simulate(
        y0, float(u), params.as_array(), config.integrator_step, t_cap, mode,
        distance, _core.CASE_NONE, 0.0, 0.0, 0.0, 0.0, 0.0, True, out)
    samples = out[:n].copy()
    samples[:, 0] += state.t
    samples[:, 5] += state.p
    end = VehicleState(v=float(y_end[0]), S=float(y_end[1]),
                       U_dL=float(y_end[2]), U_dS=float(y_end[3]),
                       p=float(y_end[4]) + state.p, t=float(t_end) + state.t)
    return status, samples, end


def _envelope_ok(samples: np.ndarray, track: Track, cleared: frozenset,
                 config: MpcConfig) -> bool:
    v_kmh = samples[:, 1] / KMH
    ps = samples[:, 5]
    allowed = np.array([road_envelope(track, p, cleared, config) for p in ps])
    return bool(np.all(v_kmh <= allowed + 1e-6))


def _trim_torque(state: VehicleState, u: float, distance: float, track: Track,
                 cleared: frozenset, params: ModelParams, config: MpcConfig) -> float:
    """Largest torque <= u whose sample-distance trajectory stays under the
    road envelope (safety governor; normally a no-op)."""
    status, samples, _ = _integrate(state, u, params, config,
                                    _core.MODE_DISTANCE, distance)
    if status != _core.STATUS_REACHED or _envelope_ok(samples, track, cleared, config):
        return u
    lo, hi = params.u_min, u
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        status, samples, _ = _integrate(state, mid, params, config,
                                        _core.MODE_DISTANCE, distance)
        if status != _core.STATUS_REACHED or _envelope_ok(samples, track, cleared, config):
            lo = mid
        else:
            hi = mid
    return lo


def breakaway_torque(params: ModelParams) -> float:
    """Torque below which the vehicle always coasts to rest."""
    return params.r * params.c0


def _rest_position(state: VehicleState, u: float, params: ModelParams,
                   config: MpcConfig) -> float:
    y0 = state.as_array()
    y0[4] = 0.0
    dummy = np.empty((1, 7))
    status, _, y_end, _, _, _ = _core.simulate(
        y0, float(u), params.as_array(), config.integrator_step, 300.0,
        _core.MODE_STOP, 0.0, _core.CASE_NONE, 0.0, 0.0, 0.0, 0.0, 0.0,
        False, dummy)
    if status != _core.STATUS_STOPPED:
        return math.inf
    return float(y_end[4])


def stop_torque(state: VehicleState, distance: float, params: ModelParams,
                config: MpcConfig) -> float:
    """Constant torque bringing the vehicle to rest `distance` metres ahead
    (never beyond), found by bisection on the rest position."""
    lo, hi = params.u_min, breakaway_torque(params) - 1e-6
    if _rest_position(state, lo, params, config) > distance:
        return lo  # even maximal braking overshoots; brake as hard as possible
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _rest_position(state, mid, params, config) <= distance:
            lo = mid
        else:
            hi = mid
    return lo


# --- the MPC step and drive loop -----------------------------------------

@dataclass
class StepResult:
    u: float
    state: VehicleState
    samples: np.ndarray
    scenario_key: str
    stopped_at: float | None = None  # sign position if this step ended at rest
    clamped: bool = False
    front: ParetoSet | None = None   # the set the control was chosen from
    selected: int = -1               # index of the chosen entry in `front`


def _scenario_tag(choice: ScenarioChoice, lookup: LookupResult | None) -> str:
    if lookup is not None:
        case, v0, vlim, ramp = lookup.key
        return f"{case}:{v0}:{vlim}:{ramp}"
    return f"{choice.case.value}:direct"


def mpc_step(state: VehicleState, track: Track, rho: float, library: Library,
             params: ModelParams, config: MpcConfig,
             cleared: frozenset = frozenset()) -> StepResult:
    v_kmh = state.v / KMH
    choice = classify_scenario(track, state.p, v_kmh, config, cleared)
    remaining = track.length - state.p
    seg_dist = min(config.delta, remaining)

    if choice.case is Case.STOP:
        d = choice.stop_distance
        if state.v <= 0.5 and d > 0.5:
            # final approach from (near) rest: creep toward the sign
            u = breakaway_torque(params) + config.creep_margin
            dist = min(seg_dist, d - 0.5)
            status, samples, end = _integrate(state, u, params, config,
                                              _core.MODE_DISTANCE, dist)
            if status != _core.STATUS_REACHED:
                raise StallDetected(f"creep failed at p={state.p:.1f} m")
            return StepResult(u=u, state=end, samples=samples,
                              scenario_key=f"{choice.case.value}:creep")
        u = stop_torque(state, d, params, config)
        predicted = _rest_position(state, u, params, config)
        if predicted <= seg_dist + 2.0:
            status, samples, end = _integrate(state, u, params, config,
                                              _core.MODE_STOP)
            # the integrator flags rest below a tiny residual velocity;
            # snap to an exact standstill for the re-plan
            end = VehicleState(v=0.0, S=end.S, U_dL=end.U_dL, U_dS=end.U_dS,
                               p=end.p, t=end.t)
            if len(samples):
                samples[-1, 1] = 0.0
            stopped_at = None
            sign = state.p + d
            if abs(end.p - sign) <= max(config.stop_tol, 0.3):
                stopped_at = sign
                if config.dwell > 0:
                    end = VehicleState(v=0.0, S=end.S, U_dL=end.U_dL,
                                       U_dS=end.U_dS, p=end.p,
                                       t=end.t + config.dwell)
            return StepResult(u=u, state=end, samples=samples,
                              scenario_key=f"{choice.case.value}:brake",
                              stopped_at=stopped_at)
        status, samples, end = _integrate(state, u, params, config,
                                          _core.MODE_DISTANCE, seg_dist)
        if status != _core.STATUS_REACHED:
            raise StallDetected(f"stop approach stalled at p={state.p:.1f} m")
        return StepResult(u=u, state=end, samples=samples,
                          scenario_key=f"{choice.case.value}:brake")

    lookup = library.lookup(v_kmh, choice.case, choice.v_lim, choice.ramp)
    entry = select_compromise(lookup.front, rho)
    u = _trim_torque(state, entry.u, seg_dist, track, cleared, params, config)
    status, samples, end = _integrate(state, u, params, config,
                                      _core.MODE_DISTANCE, seg_dist)
    if status != _core.STATUS_REACHED:
        raise StallDetected(
            f"selected torque u={u:.1f} N m cannot advance at p={state.p:.1f} m")
    return StepResult(u=u, state=end, samples=samples,
                      scenario_key=_scenario_tag(choice, lookup),
                      clamped=lookup.clamped, front=lookup.front,
                      selected=lookup.front.entries.index(entry))


RhoPolicy = Callable[[VehicleState, Track, MpcConfig, frozenset], float]


def fixed_rho(value: float) -> RhoPolicy:
    if not 0.0 <= value <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    return lambda state, track, config, cleared: value


def schedule_rho(schedule: list[tuple[float, float]]) -> RhoPolicy:
    """Piecewise-constant rho over position: list of (from_p, rho)."""
    points = sorted(schedule)

    def policy(state, track, config, cleared):
        rho = points[0][1]
        for p_from, value in points:
            if state.p >= p_from - 1e-9:
                rho = value
        return min(max(rho, 0.0), 1.0)

    return policy


def heuristic_rho(state: VehicleState, track: Track, config: MpcConfig,
                  cleared: frozenset = frozenset()) -> float:
    """Preference heuristic: favour speed at low velocity, efficiency at
    cruise, and ramp toward efficiency when a braking manoeuvre nears."""
    v_lim = track.v_max_at(state.p)
    v_kmh = state.v / KMH
    lo_v, hi_v = config.v_lo * v_lim, config.v_hi * v_lim
    if v_kmh <= lo_v:
        rho = config.rho_hi
    elif v_kmh >= hi_v:
        rho = config.rho_lo
    else:
        frac = (v_kmh - lo_v) / (hi_v - lo_v)
        rho = config.rho_hi + frac * (config.rho_lo - config.rho_hi)
    events = [s - state.p for s in track.stops_ahead(state.p, cleared)]
    events += [q - state.p for q, _ in track.limit_drops() if q >= state.p]
    near = min((d for d in events if d <= config.braking_window), default=None)
    if near is not None:
        frac = 1.0 - near / config.braking_window
        rho = rho + frac * (config.rho_lo - rho)
    return min(max(rho, 0.0), 1.0)


def run_drive(track: Track, rho_policy: RhoPolicy | float, library: Library,
              params: ModelParams, config: MpcConfig = MpcConfig(),
              observe: Callable[[VehicleState, int], VehicleState] | None = None,
              ) -> DriveLog:
    """Drive the whole track from standstill, re-planning every sample
    distance. `observe` may perturb the measured state between samples."""
    if isinstance(rho_policy, (int, float)):
        rho_policy = fixed_rho(float(rho_policy))
    state = VehicleState(v=0.0, S=config.soc0)
    cleared: set[float] = set()
    rows: list[LogSample] = []
    clamped = 0
    step_index = 0
    max_steps = int(10 * track.length / config.delta) + 200
    while state.p < track.length - 1e-6:
        if step_index >= max_steps:
            raise StallDetected(f"drive did not finish (p={state.p:.1f} m)")
        if observe is not None:
            state = observe(state, step_index)
        rho = rho_policy(state, track, config, frozenset(cleared))
        result = mpc_step(state, track, rho, library, params, config,
                          frozenset(cleared))
        start = 1 if rows else 0  # segment sample 0 repeats the previous end
        for t, v, S, udl, uds, p, current in result.samples[start:]:
            rows.append(LogSample(t=t, p=p, v_kmh=v / KMH, S=S, u=result.u,
                                  I=current, rho=rho,
                                  scenario=result.scenario_key))
        if result.stopped_at is not None:
            cleared.add(result.stopped_at)
        clamped += int(result.clamped)
        state = result.state
        step_index += 1
    totals = ObjectivePoint(J1=config.soc0 - state.S, J2=state.t)
    return DriveLog(samples=rows, totals=totals, clamped_lookups=clamped)
