"""Objective points, Pareto entries/sets and the nondominance filter."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ObjectivePoint:
    """J1 = charge consumed S(t0)-S(tf); J2 = travel time in seconds."""

    J1: float
    J2: float


@dataclass(frozen=True)
class ParetoEntry:
    u: float  # constant wheel torque, N m
    objectives: ObjectivePoint


@dataclass
class ParetoSet:
    """Mutually nondominated entries sorted by ascending J2.

    `utopia`/`nadir` hold the per-objective normalization bounds
    (componentwise best/worst over the front ends).
    """

    entries: list[ParetoEntry] = field(default_factory=list)
    utopia: tuple[float, float] | None = None
    nadir: tuple[float, float] | None = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def normalized(self, point: ObjectivePoint) -> tuple[float, float]:
        """Map objectives to [0,1]^2 using the stored utopia/nadir bounds."""
        if self.utopia is None or self.nadir is None:
            raise ValueError("normalization bounds not set")
        r1 = self.nadir[0] - self.utopia[0]
        r2 = self.nadir[1] - self.utopia[1]
        r1 = r1 if abs(r1) > 1e-15 else 1.0
        r2 = r2 if abs(r2) > 1e-15 else 1.0
        return ((point.J1 - self.utopia[0]) / r1, (point.J2 - self.utopia[1]) / r2)


def dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    """Weak Pareto dominance: a at least as good in both, better in one."""
    return (a.J1 <= b.J1 and a.J2 <= b.J2
            and (a.J1 < b.J1 or a.J2 < b.J2))


def nondominated_filter(points: list[ParetoEntry]) -> list[ParetoEntry]:
    """Keep exactly the entries not weakly dominated by any other.

    Sort-and-scan: after sorting by (J2, J1) an entry survives iff its J1
    is strictly below every previously kept J1. Duplicate objective pairs
    collapse to a single representative. O(n log n). Output sorted by J2
    ascending.
    """
    if not points:
        return []
    ordered = sorted(points, key=lambda e: (e.objectives.J2, e.objectives.J1))
    kept: list[ParetoEntry] = []
    best_j1 = float("inf")
    for entry in ordered:
        if entry.objectives.J1 < best_j1:
            kept.append(entry)
            best_j1 = entry.objectives.J1
    return kept


def is_mutually_nondominated(entries: list[ParetoEntry]) -> bool:
    for i, a in enumerate(entries):
        for j, b in enumerate(entries):
            if i != j and dominates(a.objectives, b.objectives):
                return False
    return True


def epsilon_dominates(a: tuple[float, float], b: tuple[float, float], eps: float) -> bool:
    """a dominates b by more than eps in at least one normalized objective."""
    return (a[0] <= b[0] and a[1] <= b[1]
            and (a[0] < b[0] - eps or a[1] < b[1] - eps))
