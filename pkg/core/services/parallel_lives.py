from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .locality import (
    SITE_A,
    SITE_B,
    SITE_MEETING,
    SpacetimeEvent,
    SpacetimePlan,
    export_log,
    schedule_protocol,
)

logger = logging.getLogger(__name__)

ALICE = "Alice"
BOB = "Bob"

# kolor błysku
GREEN, RED = 0, 1

RULES = ("pr", "identity")
ORDERS = ("interleaved", "alice_first", "bob_first")


@dataclass(frozen=True)
class Bubble:
    """
    @brief Jedno równoległe życie agenta: waga i lokalna pamięć rund

    transcript to krotka par (wejście, wyjście) dla rund, w których agent
    nacisnął przycisk; wyjście 0 = zielone światło, 1 = czerwone.
    """

    agent: str
    weight: float
    transcript: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not 0.0 < self.weight <= 1.0:
            raise ValueError(f"bubble weight out of (0, 1]: {self.weight!r}")

    @property
    def outputs(self) -> tuple[int, ...]:
        return tuple(o for _, o in self.transcript)

    def to_dict(self) -> dict:
        return {"weight": self.weight, "transcript": [list(r) for r in self.transcript]}


@dataclass(frozen=True)
class AgentWorld:
    """
    @brief Stan lokalnego świata jednego agenta

    inputs ma wpis dla każdej rundy protokołu (None = runda pominięta);
    events to lokalne zdarzenia czasoprzestrzenne tego agenta.
    Wartość niemutowalna: każda operacja zwraca nowy świat.
    """

    agent: str
    site: str
    position: float
    bubbles: tuple[Bubble, ...]
    inputs: tuple[int | None, ...] = ()
    events: tuple[SpacetimeEvent, ...] = ()
    clock: float = 0.0

    @property
    def rounds(self) -> int:
        return len(self.inputs)

    @property
    def presses(self) -> int:
        return sum(1 for x in self.inputs if x is not None)

    @property
    def last_event_id(self) -> str | None:
        return self.events[-1].id if self.events else None

    def total_weight(self) -> float:
        return float(sum(b.weight for b in self.bubbles))

    def _event(self, time: float, kind: str, deps: Sequence[str], offset: int = 0) -> SpacetimeEvent:
        return SpacetimeEvent(
            id=f"{self.site}{len(self.events) + offset}",
            site=self.site,
            position=self.position,
            time=time,
            kind=kind,
            deps=tuple(deps),
        )


def fresh_world(agent: str, site: str, position: float) -> AgentWorld:
    if agent not in (ALICE, BOB):
        raise ValueError(f"unknown agent: {agent}")
    return AgentWorld(agent=agent, site=site, position=float(position), bubbles=(Bubble(agent, 1.0),))


def press_button(
    world: AgentWorld,
    input_bit: int,
    time: float | None = None,
    flash_delay: float = 0.3,
) -> AgentWorld:
    """
    @brief Naciśnięcie przycisku: każdy bąbel dzieli się na dwa

    Dziecko 0 widzi zielone światło, dziecko 1 czerwone; każde dostaje
    połowę wagi rodzica. Zdarzenia (wszystkie w miejscu agenta):
    - coin_flip w t (bez zależności: wolne wejście),
    - button_press w t + δ/4 (zależy od rzutu i poprzedniego zdarzenia lokalnego),
    - split w t + δ/2, po jednym na bąbel-rodzica,
    - light_flash w t + δ, po jednym na bąbel-dziecko.

    @param world Świat przed naciśnięciem
    @param input_bit Wejście 0 lub 1
    @param time Czas rundy; domyślnie clock + 1
    @param flash_delay Czas δ od rzutu do błysku
    @return Nowy świat
    @throws ValueError Przy złym bicie wejścia lub czasie nie późniejszym niż zegar
    """
    if input_bit not in (0, 1):
        raise ValueError(f"input bit must be 0 or 1, got {input_bit!r}")
    t = world.clock + 1.0 if time is None else float(time)
    if t <= world.clock:
        raise ValueError(f"press at {t} is not after local clock {world.clock}")

    events: list[SpacetimeEvent] = []

    def emit(at: float, kind: str, deps: Sequence[str]) -> str:
        e = world._event(at, kind, deps, offset=len(events))
        events.append(e)
        return e.id

    coin = emit(t, "coin_flip", ())
    press_deps = [coin] if world.last_event_id is None else [coin, world.last_event_id]
    press = emit(t + flash_delay / 4.0, "button_press", press_deps)

    children: list[Bubble] = []
    for parent in world.bubbles:
        split = emit(t + flash_delay / 2.0, "split", [press])
        for out in (GREEN, RED):
            children.append(Bubble(world.agent, parent.weight / 2.0, parent.transcript + ((input_bit, out),)))
            emit(t + flash_delay, "light_flash", [split])

    return replace(
        world,
        bubbles=tuple(children),
        inputs=world.inputs + (input_bit,),
        events=world.events + tuple(events),
        clock=t + flash_delay,
    )


def skip_round(world: AgentWorld) -> AgentWorld:
    """Runda jednostronna: agent nie naciska, świat się nie dzieli."""
    return replace(world, inputs=world.inputs + (None,))


def depart(world: AgentWorld, time: float) -> AgentWorld:
    """Zdarzenie wyjazdu na spotkanie; zależy od ostatniego zdarzenia lokalnego."""
    if time <= world.clock:
        raise ValueError(f"departure at {time} is not after local clock {world.clock}")
    deps = () if world.last_event_id is None else (world.last_event_id,)
    e = world._event(float(time), "depart", deps)
    return replace(world, events=world.events + (e,), clock=float(time))


@dataclass(frozen=True)
class MatchedPair:
    """
    @brief Para bąbli, które spotykają się po podróży

    rounds zawiera (x, a, y, b) dla rund, w których nacisnęli oboje.
    """

    alice_bubble: Bubble
    bob_bubble: Bubble
    pair_weight: float
    rounds: tuple[tuple[int, int, int, int], ...]

    @property
    def satisfied(self) -> bool:
        return all((a ^ b) == (x & y) for x, a, y, b in self.rounds)

    def satisfied_fraction(self) -> float:
        if not self.rounds:
            return 1.0
        return sum(1 for x, a, y, b in self.rounds if (a ^ b) == (x & y)) / len(self.rounds)

    def to_dict(self) -> dict:
        return {
            "alice_outputs": list(self.alice_bubble.outputs),
            "bob_outputs": list(self.bob_bubble.outputs),
            "pair_weight": self.pair_weight,
        }


def _joint_rounds(alice: AgentWorld, bob: AgentWorld) -> list[tuple[int, int, int, int]]:
    # (runda, indeks w transkrypcie Alicji, indeks w transkrypcie Boba, ...)
    out = []
    ia = ib = 0
    for i, (x, y) in enumerate(zip(alice.inputs, bob.inputs)):
        if x is not None and y is not None:
            out.append((i, ia, ib, x & y))
        if x is not None:
            ia += 1
        if y is not None:
            ib += 1
    return out


def match_bubbles(alice: AgentWorld, bob: AgentWorld, rule: str = "pr") -> list[MatchedPair]:
    """
    @brief Łączenie bąbli Alicji i Boba przy spotkaniu

    Reguła "pr": bąbel Alicji o wyjściach (a₁..aₙ) trafia do bąbla Boba
    o wyjściach bᵢ = aᵢ ⊕ (xᵢ ∧ yᵢ) na rundach wspólnych. Reguła
    "identity" ignoruje wejścia (bᵢ = aᵢ). Przy pełnym protokole to
    bijekcja; rundy jednostronne nie nakładają warunku, więc bąbel
    drugiej strony łączy się ze wszystkimi bąblami pasującymi na
    rundach wspólnych.

    Waga pary: wA · wB · 2^j, j = liczba rund wspólnych; suma wag = 1.

    @param alice Świat Alicji
    @param bob Świat Boba
    @param rule "pr" lub "identity"
    @return Lista par w kolejności bąbli Alicji
    @throws ValueError Przy różnej liczbie rund lub nieznanej regule
    """
    if rule not in RULES:
        raise ValueError(f"unknown matching rule: {rule}")
    if alice.rounds != bob.rounds:
        raise ValueError(f"round-count mismatch: {alice.rounds} vs {bob.rounds}")

    joint = _joint_rounds(alice, bob)
    scale = float(2 ** len(joint))

    by_key: dict[tuple[int, ...], list[Bubble]] = defaultdict(list)
    for b in bob.bubbles:
        by_key[tuple(b.transcript[ib][1] for _, _, ib, _ in joint)].append(b)

    pairs: list[MatchedPair] = []
    for a in alice.bubbles:
        if rule == "pr":
            key = tuple(a.transcript[ia][1] ^ xy for _, ia, _, xy in joint)
        else:
            key = tuple(a.transcript[ia][1] for _, ia, _, _ in joint)
        for b in by_key.get(key, []):
            rounds = tuple(
                (a.transcript[ia][0], a.transcript[ia][1], b.transcript[ib][0], b.transcript[ib][1])
                for _, ia, ib, _ in joint
            )
            pairs.append(MatchedPair(a, b, a.weight * b.weight * scale, rounds))
    return pairs


def is_bijection(alice: AgentWorld, bob: AgentWorld, pairs: Sequence[MatchedPair]) -> bool:
    """Każdy bąbel obu stron występuje w dokładnie jednej parze."""
    a_seen = [p.alice_bubble.transcript for p in pairs]
    b_seen = [p.bob_bubble.transcript for p in pairs]
    return (
        len(pairs) == len(alice.bubbles) == len(bob.bubbles)
        and set(a_seen) == {b.transcript for b in alice.bubbles}
        and set(b_seen) == {b.transcript for b in bob.bubbles}
        and len(set(a_seen)) == len(a_seen)
        and len(set(b_seen)) == len(b_seen)
    )


def unilateral_partner(
    alice_bubble: Bubble,
    x_bits: Sequence[int | None],
    y_bits: Sequence[int | None],
) -> tuple[int, ...]:
    """
    @brief Wyjścia Boba, które bąbel Alicji wyznacza sam ze swojej pamięci

    Przy spotkaniu oba ciągi wejść są znane lokalnie, więc bąbel może
    policzyć bᵢ = aᵢ ⊕ (xᵢ ∧ yᵢ) bez globalnego złączenia.

    @param alice_bubble Bąbel Alicji
    @param x_bits Wejścia Alicji (None = runda pominięta)
    @param y_bits Wejścia Boba
    @return Oczekiwane wyjścia Boba na rundach wspólnych
    """
    if len(x_bits) != len(y_bits):
        raise ValueError("input sequences differ in length")
    out = []
    ia = 0
    for x, y in zip(x_bits, y_bits):
        if x is None:
            continue
        if y is not None:
            out.append(alice_bubble.transcript[ia][1] ^ (x & y))
        ia += 1
    return tuple(out)


@dataclass(frozen=True)
class ExperimentRecord:
    x_bits: tuple[int | None, ...]
    y_bits: tuple[int | None, ...]
    rule: str
    alice: AgentWorld
    bob: AgentWorld
    pairs: tuple[MatchedPair, ...]
    events: tuple[SpacetimeEvent, ...]
    plan: SpacetimePlan
    meta: dict = field(default_factory=dict)

    @property
    def n_rounds(self) -> int:
        return len(self.x_bits)

    @property
    def one_sided(self) -> bool:
        return any(x is None for x in self.x_bits) or any(y is None for y in self.y_bits)

    @property
    def joint_rounds(self) -> int:
        return sum(1 for x, y in zip(self.x_bits, self.y_bits) if x is not None and y is not None)

    def to_dict(self, include_events: bool = False) -> dict:
        d = {
            "rounds": self.n_rounds,
            "rule": self.rule,
            "one_sided": self.one_sided,
            "inputs": {"alice": list(self.x_bits), "bob": list(self.y_bits)},
            "bubbles": {
                "alice": [b.to_dict() for b in self.alice.bubbles],
                "bob": [b.to_dict() for b in self.bob.bubbles],
            },
            "pairs": [p.to_dict() for p in self.pairs],
            "n_events": len(self.events),
            "plan": self.plan.to_dict(),
        }
        if include_events:
            d["events"] = export_log(self.events)
        return d


def _event_sort_key(e: SpacetimeEvent) -> tuple:
    return (e.time, e.site, int(e.id[len(e.site):]))


def run_protocol(
    x_bits: Sequence[int | None],
    y_bits: Sequence[int | None],
    rule: str = "pr",
    separation: float = 10.0,
    c: float = 1.0,
    flash_delay: float = 0.3,
    round_spacing: float = 1.0,
    offset: float = 0.0,
    order: str = "interleaved",
) -> ExperimentRecord:
    """
    @brief Deterministyczny przebieg protokołu dla zadanych wejść

    Oba światy ewoluują niezależnie według harmonogramu schedule_protocol;
    potem agenci wyjeżdżają, spotykają się w połowie drogi i łączą bąble.
    Kolejność wykonywania (order) nie wpływa na wynik, bo światy nie
    dzielą stanu.

    @param x_bits Wejścia Alicji (0, 1 lub None = runda pominięta)
    @param y_bits Wejścia Boba
    @param rule Reguła łączenia ("pr" | "identity")
    @param separation Odległość agentów
    @param c Prędkość sygnału
    @param flash_delay Czas od rzutu do błysku
    @param round_spacing Odstęp między rundami
    @param offset Przesunięcie rund Boba
    @param order "interleaved" | "alice_first" | "bob_first"
    @return ExperimentRecord
    @throws ValueError Przy pustym lub niezgodnym ciągu wejść
    @throws ScheduleError Gdy harmonogram jest niewykonalny
    """
    x = tuple(x_bits)
    y = tuple(y_bits)
    if not x:
        raise ValueError("protocol needs at least one round")
    if len(x) != len(y):
        raise ValueError(f"round-count mismatch: {len(x)} vs {len(y)}")
    if order not in ORDERS:
        raise ValueError(f"unknown order: {order}")

    plan = schedule_protocol(
        separation,
        [round_spacing * (i + 1) for i in range(len(x))],
        c=c,
        offset=offset,
        flash_delay=flash_delay,
    )

    worlds = {
        ALICE: fresh_world(ALICE, SITE_A, plan.alice_position),
        BOB: fresh_world(BOB, SITE_B, plan.bob_position),
    }
    bits = {ALICE: x, BOB: y}
    times = {ALICE: plan.alice_rounds, BOB: plan.bob_rounds}

    def step(agent: str, i: int) -> None:
        b = bits[agent][i]
        if b is None:
            worlds[agent] = skip_round(worlds[agent])
        else:
            worlds[agent] = press_button(worlds[agent], b, times[agent][i], flash_delay)

    if order == "interleaved":
        schedule = [(agent, i) for i in range(len(x)) for agent in (ALICE, BOB)]
    elif order == "alice_first":
        schedule = [(ALICE, i) for i in range(len(x))] + [(BOB, i) for i in range(len(x))]
    else:
        schedule = [(BOB, i) for i in range(len(x))] + [(ALICE, i) for i in range(len(x))]
    for agent, i in schedule:
        step(agent, i)

    alice = depart(worlds[ALICE], plan.alice_depart)
    bob = depart(worlds[BOB], plan.bob_depart)

    meet = SpacetimeEvent(
        id=f"{SITE_MEETING}0",
        site=SITE_MEETING,
        position=plan.meeting_position,
        time=plan.meet_time,
        kind="meet",
        deps=(alice.last_event_id, bob.last_event_id),
    )
    match = SpacetimeEvent(
        id=f"{SITE_MEETING}1",
        site=SITE_MEETING,
        position=plan.meeting_position,
        time=plan.match_time,
        kind="match",
        deps=(meet.id,),
    )

    pairs = match_bubbles(alice, bob, rule)
    events = tuple(sorted(alice.events + bob.events + (meet, match), key=_event_sort_key))

    return ExperimentRecord(
        x_bits=x,
        y_bits=y,
        rule=rule,
        alice=alice,
        bob=bob,
        pairs=tuple(pairs),
        events=events,
        plan=plan,
        meta={"order": order, "weights": "halving"},
    )


def run_experiment(n_rounds: int, rng: np.random.Generator, rule: str = "pr", **kwargs) -> ExperimentRecord:
    """
    @brief Eksperyment z wejściami losowanymi przez uprząż (nie przez świat)

    Wejścia obu agentów są losowane niezależnie i jednostajnie z rng,
    więc nie mogą być skorelowane z niczym w światach agentów.

    @param n_rounds Liczba rund (≥ 1)
    @param rng Generator numpy
    @param rule Reguła łączenia
    @return ExperimentRecord
    @throws ValueError Gdy n_rounds < 1
    """
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    x = [int(v) for v in rng.integers(0, 2, size=n_rounds)]
    y = [int(v) for v in rng.integers(0, 2, size=n_rounds)]
    return run_protocol(x, y, rule=rule, **kwargs)


def pr_success_probability(record: ExperimentRecord) -> float:
    """
    @brief Ważony odsetek rund wspólnych spełniających a ⊕ b = x ∧ y

    @param record Wynik run_experiment / run_protocol
    @return Prawdopodobieństwo sukcesu
    @throws ValueError Gdy nie ma ani jednej rundy wspólnej
    """
    if record.joint_rounds == 0:
        raise ValueError("record has no joint rounds")
    return float(sum(p.pair_weight * p.satisfied_fraction() for p in record.pairs))


def output_marginals(record: ExperimentRecord, agent: str) -> list[float]:
    """
    @brief P(wyjście = 0) w każdej rundzie agenta, ważone po parach

    Wartość ½ oznacza, że lokalna statystyka nie zdradza wejść drugiej strony.
    """
    if agent not in (ALICE, BOB):
        raise ValueError(f"unknown agent: {agent}")
    world = record.alice if agent == ALICE else record.bob
    out = []
    for i in range(world.presses):
        p0 = 0.0
        for p in record.pairs:
            bubble = p.alice_bubble if agent == ALICE else p.bob_bubble
            if bubble.transcript[i][1] == GREEN:
                p0 += p.pair_weight
        out.append(p0)
    return out


def exhaustive_matching_check(n_rounds: int, rule: str = "pr") -> tuple[int, bool]:
    """
    @brief Sprawdza łączenie dla wszystkich 2ⁿ × 2ⁿ przypisań wejść

    Światy obu agentów są budowane raz na ciąg wejść, potem łączone
    w każdej kombinacji. Przypisanie przechodzi, jeśli łączenie jest
    bijekcją, każda para spełnia predykat rundowy, wagi par sumują się
    do 1 i zgadzają się z wagą bąbla Alicji.

    @param n_rounds Liczba rund n
    @param rule Reguła łączenia
    @return (liczba sprawdzonych przypisań, czy wszystkie przeszły)
    """
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")

    def build(agent: str, site: str, bits: tuple[int, ...]) -> AgentWorld:
        w = fresh_world(agent, site, 0.0)
        for b in bits:
            w = press_button(w, b)
        return w

    seqs = list(itertools.product((0, 1), repeat=n_rounds))
    alices = [build(ALICE, SITE_A, s) for s in seqs]
    bobs = [build(BOB, SITE_B, s) for s in seqs]

    checked = 0
    ok = True
    for a in alices:
        for b in bobs:
            pairs = match_bubbles(a, b, rule)
            checked += 1
            good = (
                is_bijection(a, b, pairs)
                and all(p.satisfied for p in pairs)
                and all(p.pair_weight == p.alice_bubble.weight == p.bob_bubble.weight for p in pairs)
                and abs(sum(p.pair_weight for p in pairs) - 1.0) <= 1e-12
            )
            if not good:
                logger.warning("matching check failed for x=%s y=%s", a.inputs, b.inputs)
                ok = False
    return checked, ok
