"""Position-indexed track description: speed-limit segments and stop signs.

Text format, '#' comments:
    limit <start_m> <end_m> <vmax_kmh>
    stop <pos_m>
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    v_max: float  # km/h


@dataclass(frozen=True)
class Track:
    segments: tuple[Segment, ...]
    stops: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.segments:
            raise ValueError("track needs at least one limit segment")
        prev_end = 0.0
        for seg in self.segments:
            if abs(seg.start - prev_end) > 1e-9:
                raise ValueError(f"segments must be contiguous from 0 (gap at {seg.start} m)")
            if seg.end <= seg.start or seg.v_max <= 0:
                raise ValueError("bad segment")
            prev_end = seg.end
        for s in self.stops:
            if not 0 <= s <= self.length:
                raise ValueError("stop sign outside the track")

    @property
    def length(self) -> float:
        return self.segments[-1].end

    def v_max_at(self, p: float) -> float:
        p = min(max(p, 0.0), self.length - 1e-9)
        for seg in self.segments:
            if seg.start <= p < seg.end:
                return seg.v_max
        return self.segments[-1].v_max

    def limit_drops(self) -> list[tuple[float, float]]:
        """(boundary position, limit after) for every decreasing boundary."""
        out = []
        for a, b in zip(self.segments, self.segments[1:]):
            if b.v_max < a.v_max:
                out.append((b.start, b.v_max))
        return out

    def stops_ahead(self, p: float, cleared: frozenset[float] = frozenset()) -> list[float]:
        return [s for s in sorted(self.stops) if s > p - 1e-9 and s not in cleared]


def parse_track(text: str) -> Track:
    segments = []
    stops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "limit" and len(parts) == 4:
                segments.append(Segment(float(parts[1]), float(parts[2]), float(parts[3])))
            elif parts[0] == "stop" and len(parts) == 2:
                stops.append(float(parts[1]))
            else:
                raise FormatError(f"unrecognized track line {raw!r}", line=lineno)
        except ValueError:
            raise FormatError(f"bad number in {raw!r}", line=lineno) from None
    segments.sort(key=lambda s: s.start)
    try:
        return Track(segments=tuple(segments), stops=tuple(sorted(stops)))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def load_track(path: str | Path) -> Track:
    return parse_track(Path(path).read_text(encoding="utf-8"))


def demo_track() -> Track:
    """Bundled demo: two stop signs and a low-limit middle section."""
    return Track(
        segments=(Segment(0.0, 400.0, 50.0),
                  Segment(400.0, 700.0, 30.0),
                  Segment(700.0, 1200.0, 50.0)),
        stops=(300.0, 950.0),
    )


def comparison_track() -> Track:
    """Flat no-stop track used for the dynamic-programming comparison.

    Kept short so the drive is acceleration-dominated: with the small
    energy weight the reference cost is nearly time-optimal, and a short
    track is where the preference heuristic (fast at low velocity) stays
    close to that optimum.
    """
    return Track(segments=(Segment(0.0, 150.0, 50.0),))
