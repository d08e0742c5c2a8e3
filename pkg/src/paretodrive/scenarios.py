"""Scenario taxonomy and grid enumeration.

A scenario is an initial-velocity class plus the active velocity
constraint case over a 100 m horizon: constant velocity (box), accelerate
(rising lower ramp), decelerate (falling upper ramp) or stop (brake to
rest at the ramp's zero crossing). Velocities are quantized to exact
integer keys (centi-km/h) so library files and lookups never depend on
floating-point equality.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import _core
from .errors import EmptyGrid
from .model import VehicleState
from .params import KMH


class Case(enum.Enum):
    CONSTANT = "constant"
    ACCELERATE = "accelerate"
    DECELERATE = "decelerate"
    STOP = "stop"

    @property
    def core_code(self) -> int:
        return {
            Case.CONSTANT: _core.CASE_CONSTANT,
            Case.ACCELERATE: _core.CASE_ACCELERATE,
            Case.DECELERATE: _core.CASE_DECELERATE,
            Case.STOP: _core.CASE_STOP,
        }[self]


def quantize_centi(value_kmh: float) -> int:
    return int(round(value_kmh * 100.0))


def quantize_milli(ramp: float) -> int:
    return int(round(ramp * 1000.0))


@dataclass(frozen=True)
class Scenario:
    """One library cell: constraint case + quantized velocity class.

    v0 and v_lim are km/h, ramp is (km/h)/m. For STOP scenarios v_lim
    equals v0 (braking starts at the governing limit) and the rest
    position sits where the ramp reaches zero: p_stop = v0 / ramp.
    """

    case: Case
    v0: float
    v_lim: float
    ramp: float = 0.0
    soc_override: float | None = None  # analysis hook; not part of the key

    @property
    def key(self) -> tuple[str, int, int, int]:
        return (self.case.value, quantize_centi(self.v0),
                quantize_centi(self.v_lim), quantize_milli(self.ramp))

    @property
    def p_stop(self) -> float:
        if self.case is not Case.STOP:
            raise ValueError("p_stop only defined for stop scenarios")
        return self.v0 / self.ramp

    def initial_state(self, soc: float = 0.6) -> VehicleState:
        if self.soc_override is not None:
            soc = self.soc_override
        return VehicleState(v=self.v0 * KMH, S=soc)

    def core_args(self) -> tuple[int, float, float, float, float]:
        """(case code, v0, v_lim, ramp, p_stop) in SI units for the kernels."""
        pstop = self.p_stop if self.case is Case.STOP else 0.0
        return (self.case.core_code, self.v0 * KMH, self.v_lim * KMH,
                self.ramp * KMH, pstop)

    @property
    def mode(self) -> int:
        return _core.MODE_STOP if self.case is Case.STOP else _core.MODE_DISTANCE

    def describe(self) -> str:
        if self.case is Case.CONSTANT:
            return f"constant v_lim={self.v_lim:g} v0={self.v0:g}"
        if self.case is Case.STOP:
            return f"stop v0={self.v0:g} ramp={self.ramp:g}"
        return f"{self.case.value} v0={self.v0:g} v_lim={self.v_lim:g} ramp={self.ramp:g}"


@dataclass(frozen=True)
class GridConfig:
    """Scenario grid: which cells the offline phase solves.

    The paper-scale reference configuration (0.1 km/h velocity step)
    yielded 1727 MOCPs in the original setting; the defaults here span a
    wider case set and are meant to be overridden for small builds.
    """

    v_lim_set: tuple[float, ...] = (30.0, 50.0, 60.0, 70.0, 100.0)
    v_step: float = 0.1                  # km/h
    v_cap: float = 130.0                 # km/h, top of the viability range
    ramps_accel: tuple[float, ...] = (0.05, 0.1, 0.2)   # (km/h)/m
    ramps_decel: tuple[float, ...] = (0.2,)
    ramps_stop: tuple[float, ...] = (0.5,)
    cases: tuple[Case, ...] = (Case.CONSTANT, Case.ACCELERATE,
                               Case.DECELERATE, Case.STOP)
    soc0: float = 0.6

    def fingerprint_items(self) -> list[tuple[str, str]]:
        return [
            ("grid.v_lim_set", ",".join(f"{quantize_centi(v)}" for v in self.v_lim_set)),
            ("grid.v_step", f"{quantize_centi(self.v_step)}"),
            ("grid.v_cap", f"{quantize_centi(self.v_cap)}"),
            ("grid.ramps_accel", ",".join(f"{quantize_milli(r)}" for r in self.ramps_accel)),
            ("grid.ramps_decel", ",".join(f"{quantize_milli(r)}" for r in self.ramps_decel)),
            ("grid.ramps_stop", ",".join(f"{quantize_milli(r)}" for r in self.ramps_stop)),
            ("grid.cases", ",".join(c.value for c in self.cases)),
            ("grid.soc0", f"{self.soc0!r}"),
        ]


def _grid_range(lo_centi: int, hi_centi: int, step_centi: int) -> range:
    """Grid multiples of step_centi within [lo_centi, hi_centi]."""
    first = -(-lo_centi // step_centi) * step_centi  # ceil to grid
    return range(first, hi_centi + 1, step_centi)


def enumerate_scenarios(grid: GridConfig) -> list[Scenario]:
    """Deterministic, duplicate-free enumeration of the scenario grid.

    Viability coverage: accelerate rows run from v0 = 0 and decelerate
    rows up to v_cap, so any measured velocity can be steered into the
    corridor of any limit.
    """
    step = quantize_centi(grid.v_step)
    if step <= 0 or not grid.v_lim_set or not grid.cases:
        raise EmptyGrid("grid configuration enumerates to nothing")
    out: list[Scenario] = []
    for vlim in grid.v_lim_set:
        vl = quantize_centi(vlim)
        if Case.CONSTANT in grid.cases:
            for v0 in _grid_range((vl * 8 + 9) // 10, vl, step):
                out.append(Scenario(Case.CONSTANT, v0 / 100.0, vlim))
        if Case.ACCELERATE in grid.cases:
            for ramp in grid.ramps_accel:
                for v0 in _grid_range(0, vl, step):
                    out.append(Scenario(Case.ACCELERATE, v0 / 100.0, vlim, ramp))
        if Case.DECELERATE in grid.cases:
            for ramp in grid.ramps_decel:
                for v0 in _grid_range(vl + 1, quantize_centi(grid.v_cap), step):
                    out.append(Scenario(Case.DECELERATE, v0 / 100.0, vlim, ramp))
    if Case.STOP in grid.cases:
        top = max(quantize_centi(v) for v in grid.v_lim_set)
        for ramp in grid.ramps_stop:
            for v0 in _grid_range(1, top, step):
                out.append(Scenario(Case.STOP, v0 / 100.0, v0 / 100.0, ramp))
    if not out:
        raise EmptyGrid("grid configuration enumerates to nothing")
    return out


def _span(lo_centi: int, hi_centi: int, step_centi: int) -> int:
    first = -(-lo_centi // step_centi) * step_centi
    if first > hi_centi:
        return 0
    return (hi_centi - first) // step_centi + 1


def count_scenarios(grid: GridConfig) -> int:
    """Closed-form scenario count implied by the grid (no enumeration)."""
    step = quantize_centi(grid.v_step)
    if step <= 0 or not grid.v_lim_set or not grid.cases:
        raise EmptyGrid("grid configuration enumerates to nothing")
    total = 0
    cap = quantize_centi(grid.v_cap)
    for vlim in grid.v_lim_set:
        vl = quantize_centi(vlim)
        if Case.CONSTANT in grid.cases:
            total += _span((vl * 8 + 9) // 10, vl, step)
        if Case.ACCELERATE in grid.cases:
            total += len(grid.ramps_accel) * _span(0, vl, step)
        if Case.DECELERATE in grid.cases:
            total += len(grid.ramps_decel) * _span(vl + 1, cap, step)
    if Case.STOP in grid.cases:
        top = max(quantize_centi(v) for v in grid.v_lim_set)
        total += len(grid.ramps_stop) * _span(1, top, step)
    return total
