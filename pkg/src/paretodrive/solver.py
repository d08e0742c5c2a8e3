"""Two-objective optimal control solver for one scenario.

The decision variable is a single constant torque, so every scalar
subproblem is a bounded 1-D minimization: coarse grid plus golden-section
refinement. The front is traced with the reference-point method: starting
from the scalar time-minimum, each next point minimizes the euclidean
distance (in normalized objective space) to a target point placed outside
the reachable set, warm-started by a predictor step in torque space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import FrontExhausted, NoFeasibleControl
from .pareto import ObjectivePoint, ParetoEntry, ParetoSet, nondominated_filter
from .params import KMH, ModelParams
from .scenarios import Case, Scenario

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_STATUS_REASON = {
    _core.STATUS_TIMEOUT: "horizon",
    _core.STATUS_POWER: "power",
    _core.STATUS_ENV_LOW: "velocity-lower",
    _core.STATUS_ENV_HIGH: "velocity-upper",
    _core.STATUS_CURRENT: "current",
}


@dataclass(frozen=True)
class Infeasible:
    """Constraint-violation outcome of an objective evaluation (a value, not a fault)."""

    reason: str
    position: float


@dataclass(frozen=True)
class SolverConfig:
    n_points: int = 20
    front_step: float | None = None      # normalized spacing h; default 1/(n_points-1)
    target_offset: float = 0.05          # normal offset d of the target point
    coarse_grid: int = 201
    refine_tol_frac: float = 1e-3        # of the torque span
    oracle_grid: int = 2001
    integrator_step: float = 0.01        # s
    t_cap: float = 120.0                 # s
    p_f: float = 100.0                   # m
    env_tol_kmh: float = 0.1             # envelope check tolerance
    stop_window: float = 0.5             # m: accepted rest band behind the stop point
    objective_scale: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.n_points < 2 or self.target_offset <= 0 or self.refine_tol_frac <= 0:
            raise ValueError("bad solver configuration")

    @property
    def h(self) -> float:
        return self.front_step if self.front_step is not None else 1.0 / (self.n_points - 1)

    def refine_tol(self, params: ModelParams) -> float:
        return self.refine_tol_frac * (params.u_max - params.u_min)

    def fingerprint_items(self) -> list[tuple[str, str]]:
        return [
            ("solver.n_points", str(self.n_points)),
            ("solver.front_step", repr(self.h)),
            ("solver.target_offset", repr(self.target_offset)),
            ("solver.coarse_grid", str(self.coarse_grid)),
            ("solver.refine_tol_frac", repr(self.refine_tol_frac)),
            ("solver.integrator_step", repr(self.integrator_step)),
            ("solver.t_cap", repr(self.t_cap)),
            ("solver.p_f", repr(self.p_f)),
            ("solver.env_tol_kmh", repr(self.env_tol_kmh)),
            ("solver.stop_window", repr(self.stop_window)),
        ]


def _sweep(scenario: Scenario, us: np.ndarray, params: ModelParams,
           config: SolverConfig):
    case, v0, vlim, ramp, pstop = scenario.core_args()
    y0 = scenario.initial_state().as_array()
    return _core.sweep_objectives(
        y0, np.asarray(us, dtype=np.float64), params.as_array(),
        config.integrator_step, config.t_cap, scenario.mode, config.p_f,
        case, v0, vlim, ramp, pstop, config.env_tol_kmh * KMH,
        config.stop_window)


def evaluate_objectives(scenario: Scenario, u: float, params: ModelParams,
                        config: SolverConfig) -> ObjectivePoint | Infeasible:
    """(J1, J2) for one constant torque, or the first violated constraint."""
    case, v0, vlim, ramp, pstop = scenario.core_args()
    y0 = scenario.initial_state().as_array()
    dummy = np.empty((1, 7))
    status, t_end, y_end, _, _, p_viol = _core.simulate(
        y0, float(u), params.as_array(), config.integrator_step, config.t_cap,
        scenario.mode, config.p_f, case, v0, vlim, ramp, pstop,
        config.env_tol_kmh * KMH, False, dummy)
    if scenario.mode == _core.MODE_STOP:
        if status == _core.STATUS_STOPPED:
            if pstop - config.stop_window <= y_end[4] <= pstop:
                return ObjectivePoint(J1=y0[1] - y_end[1], J2=t_end)
            return Infeasible("stop-window", y_end[4])
    elif status == _core.STATUS_REACHED:
        return ObjectivePoint(J1=y0[1] - y_end[1], J2=t_end)
    return Infeasible(_STATUS_REASON.get(status, "infeasible"), p_viol)


def _scaled(point: ObjectivePoint, config: SolverConfig) -> ObjectivePoint:
    s1, s2 = config.objective_scale
    return ObjectivePoint(point.J1 * s1, point.J2 * s2)


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimizer; f may return +inf for infeasible points."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def scalar_minimize(scenario: Scenario, objective_index: int, params: ModelParams,
                    config: SolverConfig) -> ParetoEntry:
    """Minimize one objective over feasible torques (grid + golden refinement)."""
    us = np.linspace(params.u_min, params.u_max, config.coarse_grid)
    feas, j1, j2, _ = _sweep(scenario, us, params, config)
    if not feas.any():
        raise NoFeasibleControl(f"no feasible torque for {scenario.describe()}")
    vals = np.where(feas, j1 if objective_index == 0 else j2, np.inf)
    i = int(np.argmin(vals))
    lo = us[max(i - 1, 0)]
    hi = us[min(i + 1, len(us) - 1)]

    def f(u):
        obj = evaluate_objectives(scenario, u, params, config)
        if isinstance(obj, Infeasible):
            return math.inf
        return obj.J1 if objective_index == 0 else obj.J2

    u_best = _golden_min(f, lo, hi, 0.25 * config.refine_tol(params))
    if not math.isfinite(f(u_best)):
        u_best = float(us[i])
    obj = evaluate_objectives(scenario, u_best, params, config)
    assert isinstance(obj, ObjectivePoint)
    return ParetoEntry(u=float(u_best), objectives=obj)


def _normalizer(utopia, nadir, config: SolverConfig):
    s1, s2 = config.objective_scale
    r1 = (nadir[0] - utopia[0]) * s1
    r2 = (nadir[1] - utopia[1]) * s2
    r1 = r1 if abs(r1) > 1e-15 else 1.0
    r2 = r2 if abs(r2) > 1e-15 else 1.0

    def norm(point: ObjectivePoint):
        return ((point.J1 - utopia[0]) * s1 / r1, (point.J2 - utopia[1]) * s2 / r2)

    return norm


def reference_point_step(prev_entries: list[ParetoEntry], target: tuple[float, float],
                         scenario: Scenario, params: ModelParams, config: SolverConfig,
                         norm, u_lo: float, u_hi: float) -> ParetoEntry:
    """Next front point: argmin of the normalized distance to the target.

    Warm-started at the torque-space predictor u_p = u_i + (u_i - u_{i-1});
    local golden search around u_p, with a coarse-grid fallback when the
    local bracket misses the feasible set.
    """
    if not prev_entries:
        raise ValueError("reference_point_step needs at least one previous entry")
    u_last = prev_entries[-1].u
    u_prev = prev_entries[-2].u if len(prev_entries) >= 2 else u_last
    u_pred = u_last + (u_last - u_prev)
    tol = config.refine_tol(params)

    def dist(u):
        if not (u_lo <= u <= u_hi):
            return math.inf
        obj = evaluate_objectives(scenario, u, params, config)
        if isinstance(obj, Infeasible):
            return math.inf
        n1, n2 = norm(obj)
        return math.hypot(n1 - target[0], n2 - target[1])

    width = max(4.0 * abs(u_last - u_prev), 0.05 * (u_hi - u_lo), 8.0 * tol)
    lo = max(u_lo, min(u_pred, u_last) - width)
    hi = min(u_hi, max(u_pred, u_last) + width)
    u_new = _golden_min(dist, lo, hi, 0.25 * tol)
    if not math.isfinite(dist(u_new)):
        grid = np.linspace(u_lo, u_hi, 101)
        vals = [dist(g) for g in grid]
        k = int(np.argmin(vals))
        if not math.isfinite(vals[k]):
            raise NoFeasibleControl(f"no feasible torque for {scenario.describe()}")
        span = grid[1] - grid[0]
        u_new = _golden_min(dist, max(u_lo, grid[k] - span),
                            min(u_hi, grid[k] + span), 0.25 * tol)
    if abs(u_new - u_last) <= tol:
        raise FrontExhausted("new point duplicates the previous entry")
    obj = evaluate_objectives(scenario, u_new, params, config)
    assert isinstance(obj, ObjectivePoint)
    return ParetoEntry(u=float(u_new), objectives=obj)


def _stop_position(scenario: Scenario, u: float, params: ModelParams,
                   config: SolverConfig) -> float:
    case, v0, vlim, ramp, pstop = scenario.core_args()
    y0 = scenario.initial_state().as_array()
    dummy = np.empty((1, 7))
    status, _, y_end, _, _, _ = _core.simulate(
        y0, float(u), params.as_array(), config.integrator_step, config.t_cap,
        _core.MODE_STOP, config.p_f, case, v0, vlim, ramp, pstop,
        config.env_tol_kmh * KMH, False, dummy)
    if status != _core.STATUS_STOPPED:
        return math.inf
    return float(y_end[4])


def _solve_stop_front(scenario: Scenario, params: ModelParams,
                      config: SolverConfig) -> ParetoSet:
    """Stop scenarios: the rest position is monotone in u, so the (narrow)
    band of torques stopping inside the window is found by bisection."""
    u_break = params.r * params.c0  # below this the vehicle always coasts to rest
    targets = [scenario.p_stop, scenario.p_stop - 0.5 * config.stop_window]
    entries = []
    for target in targets:
        lo, hi = params.u_min, u_break - 1e-6
        if _stop_position(scenario, lo, params, config) > target:
            continue  # even maximal braking overshoots
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if _stop_position(scenario, mid, params, config) <= target:
                lo = mid
            else:
                hi = mid
        obj = evaluate_objectives(scenario, lo, params, config)
        if isinstance(obj, ObjectivePoint):
            entries.append(ParetoEntry(u=float(lo), objectives=obj))
    if not entries:
        raise NoFeasibleControl(f"no feasible torque for {scenario.describe()}")
    front = nondominated_filter(entries)
    j1s = [e.objectives.J1 for e in front]
    j2s = [e.objectives.J2 for e in front]
    return ParetoSet(entries=front, utopia=(min(j1s), min(j2s)),
                     nadir=(max(j1s), max(j2s)))


def solve_mocp(scenario: Scenario, params: ModelParams,
               config: SolverConfig) -> ParetoSet:
    """Trace the Pareto front for one scenario (up to n_points entries)."""
    if scenario.case is Case.STOP:
        return _solve_stop_front(scenario, params, config)

    e_fast = scalar_minimize(scenario, 1, params, config)
    e_eff = scalar_minimize(scenario, 0, params, config)
    utopia = (e_eff.objectives.J1, e_fast.objectives.J2)
    nadir = (e_fast.objectives.J1, e_eff.objectives.J2)
    tol = config.refine_tol(params)
    if abs(e_fast.u - e_eff.u) <= tol:
        front = nondominated_filter([e_fast, e_eff])[:1]
        return ParetoSet(entries=front, utopia=utopia, nadir=nadir)

    norm = _normalizer(utopia, nadir, config)
    u_lo, u_hi = min(e_fast.u, e_eff.u), max(e_fast.u, e_eff.u)
    entries = [e_fast]
    h, d = config.h, config.target_offset
    for _ in range(3 * config.n_points):
        if len(entries) >= config.n_points - 1:
            break
        last = norm(entries[-1].objectives)
        if len(entries) >= 2:
            before = norm(entries[-2].objectives)
            tx, ty = last[0] - before[0], last[1] - before[1]
            length = math.hypot(tx, ty)
            if length < 1e-12:
                break
            tx, ty = tx / length, ty / length
        else:
            tx, ty = -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)
        # inward normal: the perpendicular pointing toward the utopia corner
        nx, ny = -ty, tx
        if nx * (0.0 - last[0]) + ny * (0.0 - last[1]) < 0:
            nx, ny = -nx, -ny
        target = (last[0] + h * tx + d * nx, last[1] + h * ty + d * ny)
        try:
            entry = reference_point_step(entries, target, scenario, params,
                                         config, norm, u_lo, u_hi)
        except FrontExhausted:
            break
        entries.append(entry)
        if abs(entry.u - e_eff.u) <= tol:
            break
    entries.append(e_eff)
    front = nondominated_filter(entries)
    return ParetoSet(entries=front, utopia=utopia, nadir=nadir)


def brute_force_front(scenario: Scenario, params: ModelParams,
                      config: SolverConfig, grid_size: int | None = None) -> ParetoSet:
    """Validation oracle: dense torque grid + nondominance filter."""
    n = grid_size if grid_size is not None else config.oracle_grid
    if n < 2:
        raise ValueError("grid_size must be at least 2")
    us = np.linspace(params.u_min, params.u_max, n)
    feas, j1, j2, _ = _sweep(scenario, us, params, config)
    entries = [ParetoEntry(u=float(us[i]), objectives=ObjectivePoint(float(j1[i]), float(j2[i])))
               for i in range(n) if feas[i]]
    if not entries:
        raise NoFeasibleControl(f"no feasible torque for {scenario.describe()}")
    front = nondominated_filter(entries)
    j1s = [e.objectives.J1 for e in front]
    j2s = [e.objectives.J2 for e in front]
    return ParetoSet(entries=front, utopia=(min(j1s), min(j2s)),
                     nadir=(max(j1s), max(j2s)))


def front_consistency(front: ParetoSet, oracle: ParetoSet) -> float:
    """Largest mutual epsilon-domination margin between two fronts.

    Both fronts are normalized with `front`'s stored bounds. Returns the
    smallest eps' such that no point of either front eps'-dominates a
    point of the other; a value <= eps means the fronts are consistent.
    """
    a = [front.normalized(e.objectives) for e in front.entries]
    b = [front.normalized(e.objectives) for e in oracle.entries]
    worst = 0.0
    for pa in a:
        for pb in b:
            for x, y in ((pa, pb), (pb, pa)):
                if x[0] <= y[0] and x[1] <= y[1]:
                    margin = max(y[0] - x[0], y[1] - x[1])
                    worst = max(worst, margin)
    return worst


def fronts_consistent(front: ParetoSet, oracle: ParetoSet, eps: float = 1e-3) -> bool:
    """Bidirectional check: no point of either front eps-dominates the other's."""
    return front_consistency(front, oracle) <= eps
