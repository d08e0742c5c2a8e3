"""Global dynamic-programming reference for track driving.

Solves a simplified velocity-profile problem exactly: the track is split
into equal position stages, velocity is discretized on a uniform grid,
and each transition assumes constant acceleration over the stage. The
scalar cost is J = t_f + beta * E with E the efficiency-adjusted wheel
work. Backward induction over this discretization yields the global
optimum, used as the quality bar for the receding-horizon controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import DriveLog
from .errors import InfeasiblePower, NoFeasiblePath, TrackMismatch
from .model import VehicleState, battery_current
from .params import KMH, ModelParams
from .track import Track


@dataclass(frozen=True)
class DpConfig:
    beta: float = 6e-5        # s/J, energy weight
    stage_count: int = 100
    v_step: float = 0.5       # km/h, velocity grid resolution
    soc: float = 0.6          # charge level assumed for current checks
    # corridor entry ramp from standstill, (km/h)/m; the lower velocity
    # bound is min(0.8 * v_max, ramp_entry * p) so DP faces the same
    # corridor obligation as the online controller
    ramp_entry: float = 0.1

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.stage_count < 2:
            raise ValueError("need at least 2 stages")
        if self.v_step <= 0:
            raise ValueError("v_step must be positive")


@dataclass
class DpSolution:
    track: Track
    config: DpConfig
    v_grid: np.ndarray            # m/s, shared velocity nodes
    value: np.ndarray             # (stages+1, n) cost-to-go, inf = unreachable
    policy: np.ndarray            # (stages, n) successor index, -1 = none
    profile: np.ndarray           # (stages+1,) optimal velocity per boundary, m/s
    t_f: float
    energy: float                 # J, eta-adjusted wheel work
    cost: float                   # t_f + beta * energy


def _transition(v1: float, v2: float, dp: float, params: ModelParams,
                config: DpConfig):
    """Stage cost (dt, dE, total) for v1 -> v2 over dp metres under constant
    acceleration, or None when torque/current bounds exclude it."""
    if v1 <= 0.0 and v2 <= 0.0:
        return None  # cannot cross a stage without moving
    v_avg = 0.5 * (v1 + v2)
    dt = 2.0 * dp / (v1 + v2)
    a = (v2 * v2 - v1 * v1) / (2.0 * dp)
    f_res = params.c0 + params.c1 * v_avg + params.c2 * v_avg * v_avg
    force = params.m * a + f_res
    u = force * params.r
    if not params.u_min <= u <= params.u_max:
        return None
    try:
        current = battery_current(VehicleState(v=v_avg, S=config.soc), u, params)
    except InfeasiblePower:
        return None
    if not params.I_min <= current <= params.I_max:
        return None
    work = force * dp
    energy = work / params.eta_drive if work >= 0 else params.eta_regen * work
    return dt, energy, dt + config.beta * energy


def _stage_positions(track: Track, config: DpConfig) -> np.ndarray:
    return np.linspace(0.0, track.length, config.stage_count + 1)


def _allowed_mask(track: Track, v_grid: np.ndarray, p_lo: float,
                  p_hi: float, config: DpConfig) -> np.ndarray:
    """Velocity nodes admissible on [p_lo, p_hi]: within the corridor
    [min(0.8 v_max, entry ramp), v_max], using the loosest lower and
    tightest upper limit touching the interval."""
    probes = np.linspace(p_lo, min(p_hi, track.length - 1e-9), 5)
    upper = min(track.v_max_at(p) for p in probes)
    lower = min(min(0.8 * track.v_max_at(p), config.ramp_entry * p)
                for p in probes)
    return (v_grid <= upper * KMH + 1e-12) & (v_grid >= lower * KMH - 1e-12)


def solve_dp(track: Track, params: ModelParams,
             config: DpConfig = DpConfig()) -> DpSolution:
    """Exact backward induction on the discretized profile problem.

    Starts from rest at p=0; the terminal velocity is free. Raises
    NoFeasiblePath when no admissible velocity chain reaches the end.
    """
    if track.stops:
        raise NoFeasiblePath("comparison setting excludes stop signs")
    v_top = max(s.v_max for s in track.segments)
    n = int(round(v_top / config.v_step)) + 1
    v_grid = np.arange(n) * config.v_step * KMH
    positions = _stage_positions(track, config)
    dp = positions[1] - positions[0]

    stages = config.stage_count
    value = np.full((stages + 1, n), math.inf)
    policy = np.full((stages, n), -1, dtype=np.int64)
    value[stages, :] = 0.0
    value[stages, ~_allowed_mask(track, v_grid, positions[-1] - 1e-6,
                                 positions[-1], config)] = math.inf

    cost_cache: dict[tuple[float, float], np.ndarray | None] = {}

    for k in range(stages - 1, -1, -1):
        mask_from = _allowed_mask(track, v_grid, positions[k], positions[k], config)
        mask_to = _allowed_mask(track, v_grid, positions[k], positions[k + 1], config)
        for i in range(n):
            if not mask_from[i]:
                continue
            best, best_j = math.inf, -1
            for j in range(n):
                if not mask_to[j] or not math.isfinite(value[k + 1, j]):
                    continue
                key = (v_grid[i], v_grid[j])
                if key not in cost_cache:
                    cost_cache[key] = _transition(v_grid[i], v_grid[j], dp,
                                                  params, config)
                tr = cost_cache[key]
                if tr is None:
                    continue
                total = tr[2] + value[k + 1, j]
                if total < best - 1e-15:
                    best, best_j = total, j
            value[k, i] = best
            policy[k, i] = best_j

    if not math.isfinite(value[0, 0]):
        raise NoFeasiblePath("no admissible velocity chain from rest")

    profile_idx = [0]
    for k in range(stages):
        profile_idx.append(int(policy[k, profile_idx[-1]]))
    profile = v_grid[profile_idx]

    t_f = energy = 0.0
    for k in range(stages):
        tr = _transition(profile[k], profile[k + 1], dp, params, config)
        t_f += tr[0]
        energy += tr[1]
    return DpSolution(track=track, config=config, v_grid=v_grid, value=value,
                      policy=policy, profile=profile, t_f=t_f, energy=energy,
                      cost=t_f + config.beta * energy)


def check_bellman(solution: DpSolution, params: ModelParams,
                  tol: float = 1e-9) -> float:
    """Recompute every node's value from its successors; returns the worst
    absolute mismatch (Bellman consistency check)."""
    track, config = solution.track, solution.config
    v_grid, value, policy = solution.v_grid, solution.value, solution.policy
    positions = _stage_positions(track, config)
    dp = positions[1] - positions[0]
    n = len(v_grid)
    worst = 0.0
    for k in range(config.stage_count):
        mask_from = _allowed_mask(track, v_grid, positions[k], positions[k], config)
        mask_to = _allowed_mask(track, v_grid, positions[k], positions[k + 1], config)
        for i in range(n):
            if not mask_from[i]:
                continue
            best = math.inf
            for j in range(n):
                if not mask_to[j] or not math.isfinite(value[k + 1, j]):
                    continue
                tr = _transition(v_grid[i], v_grid[j], dp, params, config)
                if tr is None:
                    continue
                best = min(best, tr[2] + value[k + 1, j])
            have = value[k, i]
            if math.isinf(best) and math.isinf(have):
                continue
            worst = max(worst, abs(best - have))
    return worst


def brute_force_dp(track: Track, params: ModelParams,
                   config: DpConfig) -> float:
    """Optimal cost by enumerating every velocity chain. Only for tiny
    instances (stage_count and grid <= ~5 nodes)."""
    if track.stops:
        raise NoFeasiblePath("comparison setting excludes stop signs")
    v_top = max(s.v_max for s in track.segments)
    n = int(round(v_top / config.v_step)) + 1
    if n ** config.stage_count > 200_000:
        raise ValueError("instance too large for enumeration")
    v_grid = np.arange(n) * config.v_step * KMH
    positions = _stage_positions(track, config)
    dp = positions[1] - positions[0]

    best = math.inf

    def recurse(k: int, i: int, acc: float):
        nonlocal best
        if acc >= best:
            return
        if k == config.stage_count:
            best = acc
            return
        mask_to = _allowed_mask(track, v_grid, positions[k], positions[k + 1], config)
        for j in range(n):
            if not mask_to[j]:
                continue
            tr = _transition(v_grid[i], v_grid[j], dp, params, config)
            if tr is None:
                continue
            recurse(k + 1, j, acc + tr[2])

    recurse(0, 0, 0.0)
    if math.isinf(best):
        raise NoFeasiblePath("no admissible velocity chain from rest")
    return best


def drive_energy(log: DriveLog, params: ModelParams) -> float:
    """Efficiency-adjusted wheel work (J) integrated over a drive log,
    matching the DP cost's energy definition."""
    total = 0.0
    for a, b in zip(log.samples, log.samples[1:]):
        dt = b.t - a.t
        if dt <= 0:
            continue
        power = 0.0
        for s in (a, b):
            p_wheel = (s.u / params.r) * (s.v_kmh * KMH)
            power += 0.5 * (p_wheel / params.eta_drive if p_wheel >= 0
                            else params.eta_regen * p_wheel)
        total += power * dt
    return total


@dataclass(frozen=True)
class ComparisonReport:
    mpc_time: float
    mpc_energy: float
    mpc_cost: float
    dp_time: float
    dp_energy: float
    dp_cost: float
    gap: float            # mpc_cost - dp_cost; >= 0 means DP is no worse
    comparable: bool      # MPC within 5% of the DP optimum

    def table(self) -> str:
        rows = [("", "time [s]", "energy [kJ]", "J"),
                ("MPC", f"{self.mpc_time:.2f}", f"{self.mpc_energy / 1e3:.2f}",
                 f"{self.mpc_cost:.4f}"),
                ("DP", f"{self.dp_time:.2f}", f"{self.dp_energy / 1e3:.2f}",
                 f"{self.dp_cost:.4f}")]
        lines = [" ".join(f"{c:>12}" for c in r) for r in rows]
        lines.append(f"gap (MPC - DP): {self.gap:.6f} s-equivalent"
                     f"  comparable: {self.comparable}")
        return "\n".join(lines)

    def csv(self) -> str:
        return ("side,time_s,energy_J,cost\n"
                f"mpc,{self.mpc_time:.6f},{self.mpc_energy:.6f},{self.mpc_cost:.9f}\n"
                f"dp,{self.dp_time:.6f},{self.dp_energy:.6f},{self.dp_cost:.9f}\n"
                f"gap,,,{self.gap:.9f}\n")


def compare(log: DriveLog, dp_solution: DpSolution, params: ModelParams,
            beta: float | None = None) -> ComparisonReport:
    """Weighted-cost comparison of a drive log against the DP reference.

    Both sides use the same energy definition (eta-adjusted wheel work).
    """
    if beta is None:
        beta = dp_solution.config.beta
    last_p = log.samples[-1].p
    if abs(last_p - dp_solution.track.length) > 1.0:
        raise TrackMismatch(
            f"drive log ends at {last_p:.1f} m, track is "
            f"{dp_solution.track.length:.1f} m")
    mpc_time = log.samples[-1].t
    mpc_energy = drive_energy(log, params)
    mpc_cost = mpc_time + beta * mpc_energy
    dp_cost = dp_solution.t_f + beta * dp_solution.energy
    gap = mpc_cost - dp_cost
    return ComparisonReport(
        mpc_time=mpc_time, mpc_energy=mpc_energy, mpc_cost=mpc_cost,
        dp_time=dp_solution.t_f, dp_energy=dp_solution.energy,
        dp_cost=dp_cost, gap=gap,
        comparable=mpc_cost <= 1.05 * dp_cost)
