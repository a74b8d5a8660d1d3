"""Diarisation error rate scoring.

DER decomposes into false alarm (FA), missed speech (MS) and speaker
confusion (SC), all as durations over the scored reference speech time
(counted with multiplicity where reference speakers overlap).  One global
speaker mapping per session maximizes correctly attributed time via the
Hungarian assignment on the reference-by-hypothesis overlap matrix.

An optional forgiveness collar excludes the neighbourhood of every
reference turn boundary from scoring (md-eval convention: the collar
applies to reference boundaries only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyError, NegativeCollarError, SessionMismatchError
from .linalg import hungarian
from .sessionio import Interval, SpeakerTimeline, normalize_intervals

_EPS = 1e-12


@dataclass
class DerReport:
    session_id: str
    total_scored: float
    fa: float
    ms: float
    sc: float
    mapping: list[tuple[str, str]] = field(default_factory=list)

    @property
    def der(self) -> float:
        return self._rate(self.fa + self.ms + self.sc)

    @property
    def fa_rate(self) -> float:
        return self._rate(self.fa)

    @property
    def ms_rate(self) -> float:
        return self._rate(self.ms)

    @property
    def sc_rate(self) -> float:
        return self._rate(self.sc)

    def _rate(self, num: float) -> float:
        if self.total_scored > 0.0:
            return num / self.total_scored
        return 0.0 if num <= 0.0 else float("inf")

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "total_scored": self.total_scored,
            "fa": self.fa,
            "ms": self.ms,
            "sc": self.sc,
            "der": self.der,
            "fa_rate": self.fa_rate,
            "ms_rate": self.ms_rate,
            "sc_rate": self.sc_rate,
            "mapping": [list(pair) for pair in self.mapping],
        }

    def render_table(self) -> str:
        rows = [
            ("scored speech", f"{self.total_scored:.3f}s", ""),
            ("false alarm", f"{self.fa:.3f}s", f"{self.fa_rate:.2%}"),
            ("missed speech", f"{self.ms:.3f}s", f"{self.ms_rate:.2%}"),
            ("speaker confusion", f"{self.sc:.3f}s", f"{self.sc_rate:.2%}"),
            ("DER", "", f"{self.der:.2%}"),
        ]
        width = max(len(r[0]) for r in rows)
        lines = [f"{name:<{width}}  {dur:>12}  {rate:>8}" for name, dur, rate in rows]
        if self.mapping:
            lines.append("mapping: " + ", ".join(f"{r}->{h}" for r, h in self.mapping))
        return "\n".join(lines)


def _speaker_intervals(timeline: SpeakerTimeline) -> dict[str, list[Interval]]:
    """Per-speaker merged intervals (same-speaker overlap counts once)."""
    by_spk: dict[str, list[Interval]] = {}
    for label, onset, dur in timeline.turns:
        by_spk.setdefault(label, []).append((onset, onset + dur))
    return {spk: normalize_intervals(ivs) for spk, ivs in by_spk.items()}


def _subtract(intervals: list[Interval], holes: list[Interval]) -> list[Interval]:
    """Set difference of interval unions (both normalized)."""
    out: list[Interval] = []
    hi = 0
    for s, e in intervals:
        cur = s
        while hi < len(holes) and holes[hi][1] <= cur:
            hi += 1
        j = hi
        while j < len(holes) and holes[j][0] < e:
            hs, he = holes[j]
            if hs > cur:
                out.append((cur, hs))
            cur = max(cur, he)
            if cur >= e:
                break
            j += 1
        if cur < e:
            out.append((cur, e))
    return [(s, e) for s, e in out if e - s > _EPS]


def _overlap_length(a: list[Interval], b: list[Interval]) -> float:
    total = 0.0
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            total += hi - lo
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return total


def compute_der(ref: SpeakerTimeline, hyp: SpeakerTimeline, collar: float = 0.0) -> DerReport:
    """Score a hypothesis timeline against a reference timeline.

    The time axis is partitioned at every turn boundary; regions within
    ``collar`` of a reference boundary are dropped from scoring.  Per
    region with R reference and H hypothesis speakers active:
    MS += max(0, R-H), FA += max(0, H-R), SC += min(R, H) - correct,
    each weighted by the region duration, where ``correct`` counts
    reference speakers whose globally mapped hypothesis speaker is active.
    """
    if collar < 0.0:
        raise NegativeCollarError(f"collar must be >= 0, got {collar}")
    if ref.session_id != hyp.session_id:
        raise SessionMismatchError(
            f"reference is {ref.session_id!r}, hypothesis is {hyp.session_id!r}"
        )

    ref_spk = _speaker_intervals(ref)
    hyp_spk = _speaker_intervals(hyp)

    holes: list[Interval] = []
    if collar > 0.0:
        boundaries = sorted({t for ivs in ref_spk.values() for iv in ivs for t in iv})
        holes = normalize_intervals([(b - collar, b + collar) for b in boundaries])

    ref_scored = {spk: _subtract(ivs, holes) for spk, ivs in ref_spk.items()}
    hyp_scored = {spk: _subtract(ivs, holes) for spk, ivs in hyp_spk.items()}
    ref_names = sorted(ref_scored)
    hyp_names = sorted(hyp_scored)

    # global mapping: maximize correctly attributed time over scored regions
    mapping: dict[str, str] = {}
    if ref_names and hyp_names:
        overlap = [
            [_overlap_length(ref_scored[r], hyp_scored[h]) for h in hyp_names]
            for r in ref_names
        ]
        pairs = hungarian([[-v for v in row] for row in overlap])
        mapping = {
            ref_names[i]: hyp_names[j] for i, j in pairs if overlap[i][j] > 0.0
        }

    points = sorted(
        {t for ivs in ref_scored.values() for iv in ivs for t in iv}
        | {t for ivs in hyp_scored.values() for iv in ivs for t in iv}
    )
    fa = ms = sc = total = 0.0
    for lo, hi in zip(points, points[1:]):
        dur = hi - lo
        if dur <= _EPS:
            continue
        mid = 0.5 * (lo + hi)
        r_active = [spk for spk, ivs in ref_scored.items() if _contains(ivs, mid)]
        h_active = {spk for spk, ivs in hyp_scored.items() if _contains(ivs, mid)}
        nr, nh = len(r_active), len(h_active)
        if nr == 0 and nh == 0:
            continue
        total += nr * dur
        ms += max(0, nr - nh) * dur
        fa += max(0, nh - nr) * dur
        correct = sum(1 for spk in r_active if mapping.get(spk) in h_active)
        sc += (min(nr, nh) - correct) * dur

    return DerReport(
        session_id=ref.session_id,
        total_scored=total,
        fa=fa,
        ms=ms,
        sc=sc,
        mapping=sorted(mapping.items()),
    )


def _contains(intervals: list[Interval], t: float) -> bool:
    for s, e in intervals:
        if s <= t < e:
            return True
        if s > t:
            return False
    return False


def aggregate_der(reports: list[DerReport]) -> DerReport:
    """Corpus-level report: durations summed, rates recomputed."""
    if not reports:
        raise EmptyError("no reports to aggregate")
    return DerReport(
        session_id="ALL",
        total_scored=sum(r.total_scored for r in reports),
        fa=sum(r.fa for r in reports),
        ms=sum(r.ms for r in reports),
        sc=sum(r.sc for r in reports),
        mapping=[],
    )
