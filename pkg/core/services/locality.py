from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .connectivity import components

logger = logging.getLogger(__name__)

SITE_A = "A"
SITE_B = "B"
SITE_MEETING = "Meeting"
SITES = (SITE_A, SITE_B, SITE_MEETING)
LOCAL_SITES = (SITE_A, SITE_B)

KINDS = ("coin_flip", "button_press", "split", "light_flash", "depart", "meet", "match")

AUDIT_EPS = 1e-9


class MalformedLogError(ValueError):
    """Log zdarzeń z powtórzonym id, nieznaną zależnością albo cyklem."""


class ScheduleError(ValueError):
    """Harmonogram rund, którego nie da się zrealizować przestrzennopodobnie."""


@dataclass(frozen=True)
class SpacetimeEvent:
    """
    @brief Zdarzenie w czasoprzestrzeni 1-D z listą zależności przyczynowych

    Rzuty monetą nie mają zależności: wejścia są wolne.
    """

    id: str
    site: str
    position: float
    time: float
    kind: str
    deps: tuple[str, ...] = ()

    def __post_init__(self):
        if self.site not in SITES:
            raise MalformedLogError(f"unknown site: {self.site!r}")
        if self.kind not in KINDS:
            raise MalformedLogError(f"unknown event kind: {self.kind!r}")
        if not (math.isfinite(self.position) and math.isfinite(self.time)):
            raise MalformedLogError(f"event {self.id}: non-finite coordinates")
        object.__setattr__(self, "deps", tuple(self.deps))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "site": self.site,
            "position": self.position,
            "time": self.time,
            "kind": self.kind,
            "deps": list(self.deps),
        }


@dataclass(frozen=True)
class Violation:
    event_id: str
    dep_id: str
    required_time: float
    actual_time: float
    reasons: tuple[str, ...]

    @property
    def reason(self) -> str:
        return self.reasons[0]

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "dep_id": self.dep_id,
            "required_time": self.required_time,
            "actual_time": self.actual_time,
            "reasons": list(self.reasons),
        }


@dataclass(frozen=True)
class CausalReport:
    n_events: int
    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "n_events": self.n_events,
            "passed": self.passed,
            "violations": [v.to_dict() for v in self.violations],
        }


def _index(log: Sequence[SpacetimeEvent]) -> dict[str, SpacetimeEvent]:
    by_id: dict[str, SpacetimeEvent] = {}
    for e in log:
        if e.id in by_id:
            raise MalformedLogError(f"duplicate event id: {e.id}")
        by_id[e.id] = e
    for e in log:
        for d in e.deps:
            if d not in by_id:
                raise MalformedLogError(f"event {e.id} depends on unknown id {d}")
    return by_id


def _check_acyclic(log: Sequence[SpacetimeEvent]) -> None:
    # Kahn: jeśli nie da się zdjąć wszystkich zdarzeń, jest cykl
    indeg = {e.id: len(set(e.deps)) for e in log}
    children: dict[str, list[str]] = {e.id: [] for e in log}
    for e in log:
        for d in set(e.deps):
            children[d].append(e.id)

    q = deque(i for i, k in indeg.items() if k == 0)
    done = 0
    while q:
        x = q.popleft()
        done += 1
        for y in children[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                q.append(y)

    if done != len(log):
        raise MalformedLogError("dependency cycle in event log")


def audit(log: Sequence[SpacetimeEvent], c: float = 1.0, eps: float = AUDIT_EPS) -> CausalReport:
    """
    @brief Audyt przyczynowy logu zdarzeń

    Dla każdej zależności e → d sprawdza:
    - time_order: d musi być ściśle wcześniejsze od e,
    - light_cone: t(e) - t(d) ≥ |x(e) - x(d)| / c (z tolerancją eps),
    - cross_site: zdarzenie na A nie może zależeć od zdarzenia na B
      i odwrotnie (zdarzenia w miejscu spotkania mogą zależeć od obu).

    Każda błędna zależność daje jeden wpis; `reasons` wymienia wszystkie
    naruszone warunki.

    @param log Lista zdarzeń
    @param c Prędkość sygnału (> 0)
    @param eps Tolerancja dla porównań czasu
    @return CausalReport
    @throws MalformedLogError Przy powtórzonych id, nieznanych zależnościach lub cyklu
    @throws ValueError Gdy c ≤ 0
    """
    if not c > 0:
        raise ValueError(f"signal speed must be > 0, got {c}")

    by_id = _index(log)
    _check_acyclic(log)

    violations: list[Violation] = []
    for e in log:
        for dep_id in e.deps:
            d = by_id[dep_id]
            required = d.time + abs(e.position - d.position) / c
            reasons = []
            if e.time - d.time <= 0:
                reasons.append("time_order")
            if e.time < required - eps:
                reasons.append("light_cone")
            if e.site in LOCAL_SITES and d.site in LOCAL_SITES and e.site != d.site:
                reasons.append("cross_site")
            if reasons:
                violations.append(Violation(e.id, d.id, required, e.time, tuple(reasons)))

    report = CausalReport(len(log), tuple(violations))
    if not report.passed:
        logger.info("audit: %d violation(s) in %d events", len(violations), len(log))
    return report


def sites_isolated(log: Sequence[SpacetimeEvent]) -> bool:
    """
    @brief Czy zdarzenia A i B przed spotkaniem tworzą rozłączne składowe

    Graf: węzły = zdarzenia na A i B, krawędzie = zależności między nimi.
    Żadna składowa nie może zawierać zdarzeń z obu miejsc.
    """
    local = [e for e in log if e.site in LOCAL_SITES]
    site_of = {e.id: e.site for e in local}
    edges = [(e.id, d) for e in local for d in e.deps]
    for comp in components([e.id for e in local], edges):
        if len({site_of[i] for i in comp}) > 1:
            return False
    return True


def plant_signal(
    log: Sequence[SpacetimeEvent],
    rng: np.random.Generator,
    c: float = 1.0,
) -> list[SpacetimeEvent]:
    """
    @brief Wstrzyknięcie błędu: jedna zależność od zdarzenia z drugiego miejsca

    Wybierane jest zdarzenie e na A lub B (nie rzut monetą) i wcześniejsze
    zdarzenie d z drugiego miejsca; e dostaje dodatkową zależność od d.
    Pary rozdzielone przestrzennopodobnie mają pierwszeństwo.

    @param log Uczciwy log
    @param rng Generator numpy
    @return Nowy log (wejście nie jest modyfikowane)
    @throws ValueError Gdy w logu nie ma pary, w którą da się wstrzyknąć sygnał
    """
    local = [e for e in log if e.site in LOCAL_SITES]
    pairs: list[tuple[SpacetimeEvent, SpacetimeEvent]] = []
    for e in local:
        if e.kind == "coin_flip":
            continue
        for d in local:
            if d.site != e.site and d.time < e.time and d.id not in e.deps:
                pairs.append((e, d))
    if not pairs:
        raise ValueError("no cross-site pair available for a planted signal")

    spacelike = [(e, d) for e, d in pairs if e.time - d.time < abs(e.position - d.position) / c]
    pool = spacelike or pairs
    e, d = pool[int(rng.integers(len(pool)))]

    logger.debug("planting signal %s -> %s", e.id, d.id)
    return [replace(x, deps=x.deps + (d.id,)) if x.id == e.id else x for x in log]


def export_log(log: Iterable[SpacetimeEvent]) -> list[dict]:
    return [e.to_dict() for e in log]


@dataclass(frozen=True)
class SpacetimePlan:
    """
    @brief Plan czasoprzestrzenny protokołu dwóch agentów

    Alicja stoi w x = 0, Bob w x = separation, spotkanie w połowie drogi.
    Przedział naciśnięcie → błysk trwa flash_delay.
    """

    separation: float
    c: float
    flash_delay: float
    alice_rounds: tuple[float, ...]
    bob_rounds: tuple[float, ...]
    alice_depart: float
    bob_depart: float
    meet_time: float
    match_time: float

    @property
    def alice_position(self) -> float:
        return 0.0

    @property
    def bob_position(self) -> float:
        return self.separation

    @property
    def meeting_position(self) -> float:
        return self.separation / 2.0

    def round_gaps(self) -> list[float]:
        """Największa różnica czasu między przedziałami rundy na A i B."""
        return [abs(a - b) + self.flash_delay for a, b in zip(self.alice_rounds, self.bob_rounds)]

    def to_dict(self) -> dict:
        return {
            "separation": self.separation,
            "c": self.c,
            "flash_delay": self.flash_delay,
            "alice_rounds": list(self.alice_rounds),
            "bob_rounds": list(self.bob_rounds),
            "alice_depart": self.alice_depart,
            "bob_depart": self.bob_depart,
            "meet_time": self.meet_time,
            "match_time": self.match_time,
        }


def schedule_protocol(
    separation: float,
    round_times: Sequence[float],
    c: float = 1.0,
    offset: float = 0.0,
    flash_delay: float = 0.3,
) -> SpacetimePlan:
    """
    @brief Planuje rundy obu agentów i spotkanie

    Runda i Alicji zaczyna się w round_times[i], Boba w round_times[i] + offset.
    Przedziały [t, t + flash_delay] na A i B muszą być przestrzennopodobne:
    |tA - tB| + flash_delay < separation / c. Każdy agent wyrusza
    flash_delay po ostatnim błysku i podróżuje z prędkością c, więc
    spotkanie leży w przyszłych stożkach świetlnych obu stron.

    @param separation Odległość między agentami (> 0)
    @param round_times Ściśle rosnące czasy rund
    @param c Prędkość sygnału
    @param offset Przesunięcie rund Boba względem Alicji
    @param flash_delay Czas od naciśnięcia do błysku (> 0)
    @return SpacetimePlan
    @throws ScheduleError Gdy harmonogram jest niewykonalny
    """
    if not separation > 0:
        raise ScheduleError(f"separation must be > 0, got {separation}")
    if not c > 0:
        raise ScheduleError(f"signal speed must be > 0, got {c}")
    if not flash_delay > 0:
        raise ScheduleError(f"flash delay must be > 0, got {flash_delay}")

    times = [float(t) for t in round_times]
    if not times:
        raise ScheduleError("at least one round is required")
    if not all(math.isfinite(t) for t in times) or not math.isfinite(offset):
        raise ScheduleError("round times must be finite")
    for prev, nxt in zip(times, times[1:]):
        if nxt - prev <= flash_delay:
            raise ScheduleError(f"rounds at {prev} and {nxt} overlap (flash delay {flash_delay})")

    alice = tuple(times)
    bob = tuple(t + float(offset) for t in times)
    limit = separation / c
    for i, (ta, tb) in enumerate(zip(alice, bob)):
        if abs(ta - tb) + flash_delay >= limit:
            raise ScheduleError(
                f"round {i} not spacelike: |dt| + flash = {abs(ta - tb) + flash_delay} >= {limit}"
            )

    alice_depart = alice[-1] + 2 * flash_delay
    bob_depart = bob[-1] + 2 * flash_delay
    meet_time = max(alice_depart, bob_depart) + (separation / 2.0) / c

    return SpacetimePlan(
        separation=float(separation),
        c=float(c),
        flash_delay=float(flash_delay),
        alice_rounds=alice,
        bob_rounds=bob,
        alice_depart=alice_depart,
        bob_depart=bob_depart,
        meet_time=meet_time,
        match_time=meet_time + flash_delay / 3.0,
    )
