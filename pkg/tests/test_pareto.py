"""Dominance relations and the nondominance filter."""

from hypothesis import given, settings
from hypothesis import strategies as st

from paretodrive.pareto import (ObjectivePoint, ParetoEntry, ParetoSet,
                                dominates, epsilon_dominates,
                                is_mutually_nondominated, nondominated_filter)


def P(j1, j2):
    return ParetoEntry(u=0.0, objectives=ObjectivePoint(j1, j2))


def test_dominates_basic():
    assert dominates(ObjectivePoint(1, 1), ObjectivePoint(2, 2))
    assert dominates(ObjectivePoint(1, 2), ObjectivePoint(2, 2))
    assert not dominates(ObjectivePoint(1, 3), ObjectivePoint(2, 2))
    assert not dominates(ObjectivePoint(2, 2), ObjectivePoint(2, 2))


def test_filter_keeps_tradeoff_curve():
    front = nondominated_filter([P(3, 1), P(2, 2), P(1, 3), P(3, 3), P(2.5, 1.5)])
    assert [(e.objectives.J1, e.objectives.J2) for e in front] == [
        (3, 1), (2.5, 1.5), (2, 2), (1, 3)]


def test_filter_collapses_duplicates():
    front = nondominated_filter([P(1, 1), P(1, 1), P(1, 1)])
    assert len(front) == 1


def test_filter_empty():
    assert nondominated_filter([]) == []


def _brute_force(entries):
    """O(n^2) oracle; collapses duplicate objective pairs like the filter."""
    seen = set()
    out = []
    for a in entries:
        key = (a.objectives.J1, a.objectives.J2)
        if key in seen:
            continue
        if any(dominates(b.objectives, a.objectives) for b in entries):
            continue
        seen.add(key)
        out.append(a)
    out.sort(key=lambda e: e.objectives.J2)
    return out


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), max_size=40))
@settings(max_examples=200, deadline=None)
def test_filter_matches_quadratic_oracle(pairs):
    entries = [P(float(a), float(b)) for a, b in pairs]
    got = [(e.objectives.J1, e.objectives.J2) for e in nondominated_filter(entries)]
    want = [(e.objectives.J1, e.objectives.J2) for e in _brute_force(entries)]
    assert got == want
    assert is_mutually_nondominated(nondominated_filter(entries))


def test_filter_output_is_monotone_tradeoff():
    front = nondominated_filter([P(float(10 - i), float(i)) for i in range(10)]
                                + [P(5.0, 5.0), P(9.0, 9.0)])
    j1 = [e.objectives.J1 for e in front]
    j2 = [e.objectives.J2 for e in front]
    assert j2 == sorted(j2)
    assert j1 == sorted(j1, reverse=True)


def test_epsilon_dominates_needs_margin():
    assert epsilon_dominates((0.0, 0.0), (0.1, 0.1), eps=0.05)
    assert not epsilon_dominates((0.0, 0.0), (0.1, 0.1), eps=0.2)
    assert not epsilon_dominates((0.2, 0.0), (0.1, 0.5), eps=0.05)


def test_normalized_handles_degenerate_range():
    ps = ParetoSet(entries=[P(1, 1)], utopia=(1.0, 1.0), nadir=(1.0, 2.0))
    n1, n2 = ps.normalized(ObjectivePoint(1.0, 1.5))
    assert n1 == 0.0
    assert n2 == 0.5
