"""Offline Pareto-set library: build, persist, and safe-side lookup.

File format (text, UTF-8, LF):

    MPCLIB 1
    confighash <16 hex chars>
    param <name> <value>                    # model/solver/grid block
    scenario <case> <v0_centi> <vlim_centi> <ramp_milli> <n | INFEASIBLE [reason]>
    point <u> <J1> <J2>                     # n lines, J2 ascending

Velocities are centi-km/h integers and ramps milli-(km/h)/m integers, so
scenario keys are exact. Decimals carry 12 significant digits.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import EmptyGrid, FormatError, NoFeasibleControl, NoFeasibleScenario
from .pareto import ObjectivePoint, ParetoEntry, ParetoSet, is_mutually_nondominated
from .params import ModelParams
from .scenarios import Case, GridConfig, Scenario, enumerate_scenarios
from .solver import SolverConfig, solve_mocp

MAGIC = "MPCLIB 1"


@dataclass(frozen=True)
class InfeasibleMarker:
    reason: str


def _param_lines(params: ModelParams, solver: SolverConfig, grid: GridConfig) -> list[str]:
    lines = [f"param model.{f.name} {getattr(params, f.name):.12g}"
             for f in fields(ModelParams)]
    for name, value in solver.fingerprint_items() + grid.fingerprint_items():
        lines.append(f"param {name} {value}")
    return lines


def config_hash(params: ModelParams, solver: SolverConfig, grid: GridConfig) -> str:
    return _hash_lines(_param_lines(params, solver, grid))


def _hash_lines(param_lines: list[str]) -> str:
    digest = hashlib.sha256("\n".join(param_lines).encode()).hexdigest()
    return digest[:16]


def _sort_key(key: tuple[str, int, int, int]):
    case, v0, vlim, ramp = key
    return (case, vlim, ramp, v0)


@dataclass
class Library:
    params: ModelParams
    param_lines: list[str]
    entries: dict[tuple[str, int, int, int], ParetoSet | InfeasibleMarker]

    def __post_init__(self):
        self._index: dict[tuple[str, int, int], list[int]] = {}
        for key in sorted(self.entries, key=_sort_key):
            case, v0, vlim, ramp = key
            group = (case, -1 if case == Case.STOP.value else vlim, ramp)
            self._index.setdefault(group, []).append(v0)
        for v0s in self._index.values():
            v0s.sort()

    @property
    def hash(self) -> str:
        return _hash_lines(self.param_lines)

    def __eq__(self, other):
        """Semantic equality at serialization precision (12 significant
        digits), so load(save(L)) == L holds."""
        if not (isinstance(other, Library)
                and self.param_lines == other.param_lines
                and self.entries.keys() == other.entries.keys()):
            return False
        for key, mine in self.entries.items():
            theirs = other.entries[key]
            if isinstance(mine, InfeasibleMarker) or isinstance(theirs, InfeasibleMarker):
                if mine != theirs:
                    return False
                continue
            if len(mine.entries) != len(theirs.entries):
                return False
            for a, b in zip(mine.entries, theirs.entries):
                for x, y in ((a.u, b.u),
                             (a.objectives.J1, b.objectives.J1),
                             (a.objectives.J2, b.objectives.J2)):
                    if abs(x - y) > 5e-12 * max(abs(x), abs(y), 1e-300):
                        return False
        return True

    def lookup(self, v_measured: float, case: Case, v_lim: float = 0.0,
               ramp: float = 0.0) -> "LookupResult":
        """Safe-side scenario lookup: smallest stored v0 >= v_measured.

        Walks upward past infeasible markers; clamps (with a flag) when
        v_measured exceeds the grid top.
        """
        from .scenarios import quantize_centi, quantize_milli
        vlim_centi = -1 if case is Case.STOP else quantize_centi(v_lim)
        group = (case.value, vlim_centi, quantize_milli(ramp))
        v0s = self._index.get(group)
        if not v0s:
            raise NoFeasibleScenario(
                f"library has no {case.value} scenarios for v_lim={v_lim:g} ramp={ramp:g}")
        target = quantize_centi(v_measured)
        i = bisect_left(v0s, target)
        clamped = False
        step = 1
        if i >= len(v0s):
            # above the grid top: clamp and search downward instead
            i = len(v0s) - 1
            clamped = True
            step = -1
        while 0 <= i < len(v0s):
            v0 = v0s[i]
            key = (case.value, v0,
                   v0 if case is Case.STOP else quantize_centi(v_lim),
                   quantize_milli(ramp))
            front = self.entries.get(key)
            if isinstance(front, ParetoSet):
                return LookupResult(front=front, key=key,
                                    v0=v0 / 100.0, clamped=clamped)
            i += step
        raise NoFeasibleScenario(
            f"no feasible {case.value} entry at or above v={v_measured:.2f} km/h")


@dataclass(frozen=True)
class LookupResult:
    front: ParetoSet
    key: tuple[str, int, int, int]
    v0: float
    clamped: bool


def _solve_one(args):
    scenario, params, solver_config = args
    try:
        front = solve_mocp(scenario, params, solver_config)
        return scenario.key, front
    except NoFeasibleControl as exc:
        return scenario.key, InfeasibleMarker(reason=str(exc).split(" for ")[0])


def build_library(grid: GridConfig, params: ModelParams,
                  solver_config: SolverConfig, workers: int = 1,
                  progress=None) -> Library:
    """Solve every enumerated scenario. Deterministic regardless of worker count."""
    scenarios = enumerate_scenarios(grid)
    if not scenarios:
        raise EmptyGrid("no scenarios to solve")
    jobs = [(s, params, solver_config) for s in scenarios]
    entries: dict = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_solve_one, jobs, chunksize=8)
            for i, (key, value) in enumerate(results):
                entries[key] = value
                if progress:
                    progress(i + 1, len(jobs))
    else:
        for i, job in enumerate(jobs):
            key, value = _solve_one(job)
            entries[key] = value
            if progress:
                progress(i + 1, len(jobs))
    return Library(params=params,
                   param_lines=_param_lines(params, solver_config, grid),
                   entries=entries)


def save(library: Library, path: str | Path) -> None:
    lines = [MAGIC, f"confighash {library.hash}"]
    lines.extend(library.param_lines)
    for key in sorted(library.entries, key=_sort_key):
        case, v0, vlim, ramp = key
        value = library.entries[key]
        if isinstance(value, InfeasibleMarker):
            suffix = "INFEASIBLE"
            if value.reason:
                suffix += f" {value.reason.replace(' ', '_')}"
            lines.append(f"scenario {case} {v0} {vlim} {ramp} {suffix}")
        else:
            lines.append(f"scenario {case} {v0} {vlim} {ramp} {len(value.entries)}")
            for e in value.entries:
                lines.append(f"point {e.u:.12g} {e.objectives.J1:.12g} "
                             f"{e.objectives.J2:.12g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load(path: str | Path, expect_hash: str | None = None) -> Library:
    """Parse and re-validate a library file.

    Rejects bad magic, hash mismatches, malformed lines, truncated point
    blocks, unsorted or dominated fronts.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise FormatError("bad magic", line=1)
    if len(lines) < 2 or not lines[1].startswith("confighash "):
        raise FormatError("missing confighash", line=2)
    stated_hash = lines[1].split(" ", 1)[1]

    param_lines: list[str] = []
    model_values: dict[str, float] = {}
    i = 2
    while i < len(lines) and lines[i].startswith("param "):
        param_lines.append(lines[i])
        parts = lines[i].split(" ")
        if len(parts) != 3:
            raise FormatError("malformed param line", line=i + 1)
        if parts[1].startswith("model."):
            try:
                model_values[parts[1][len("model."):]] = float(parts[2])
            except ValueError:
                raise FormatError("bad param value", line=i + 1) from None
        i += 1
    if _hash_lines(param_lines) != stated_hash:
        raise FormatError("confighash mismatch", line=2)
    if expect_hash is not None and stated_hash != expect_hash:
        raise FormatError("library was built with a different configuration", line=2)
    try:
        params = ModelParams(**model_values)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad model parameter block: {exc}", line=i) from None

    entries: dict = {}
    while i < len(lines):
        parts = lines[i].split(" ")
        if parts[0] != "scenario" or len(parts) < 6:
            raise FormatError("expected scenario line", line=i + 1)
        try:
            key = (parts[1], int(parts[2]), int(parts[3]), int(parts[4]))
        except ValueError:
            raise FormatError("bad scenario key", line=i + 1) from None
        if parts[1] not in {c.value for c in Case}:
            raise FormatError(f"unknown case {parts[1]!r}", line=i + 1)
        if key in entries:
            raise FormatError("duplicate scenario key", line=i + 1)
        header_line = i + 1
        i += 1
        if parts[5] == "INFEASIBLE":
            entries[key] = InfeasibleMarker(reason=" ".join(parts[6:]))
            continue
        try:
            n_points = int(parts[5])
        except ValueError:
            raise FormatError("bad point count", line=header_line) from None
        front_entries = []
        for _ in range(n_points):
            if i >= len(lines) or not lines[i].startswith("point "):
                raise FormatError("truncated point block", line=i + 1)
            fields_ = lines[i].split(" ")
            if len(fields_) != 4:
                raise FormatError("malformed point line", line=i + 1)
            try:
                u, j1, j2 = (float(x) for x in fields_[1:])
            except ValueError:
                raise FormatError("bad point value", line=i + 1) from None
            front_entries.append(ParetoEntry(u=u, objectives=ObjectivePoint(j1, j2)))
            i += 1
        j2s = [e.objectives.J2 for e in front_entries]
        if j2s != sorted(j2s):
            raise FormatError("front not sorted by J2", line=header_line)
        if not is_mutually_nondominated(front_entries):
            raise FormatError("front contains dominated points", line=header_line)
        j1s = [e.objectives.J1 for e in front_entries]
        entries[key] = ParetoSet(entries=front_entries,
                                 utopia=(min(j1s), min(j2s)),
                                 nadir=(max(j1s), max(j2s)))
    return Library(params=params, param_lines=param_lines, entries=entries)
