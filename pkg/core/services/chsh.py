from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .entanglement import (
    AngleBasis,
    CorrelatorEstimate,
    SIGNS,
    born_tables,
    correlation_from_tables,
    correlator,
)
from .locality import AUDIT_EPS, audit, sites_isolated
from .parallel_lives import ExperimentRecord, run_experiment, run_protocol
from .refine import hill_climb

logger = logging.getLogger(__name__)

STRATEGY_CLASSES = ("lhv", "quantum", "parallel_lives")

# PREDICATE[x, y, a, b] = 1 gdy a ⊕ b = x ∧ y
PREDICATE = np.array(
    [[[[1.0 if (a ^ b) == (x & y) else 0.0 for b in (0, 1)] for a in (0, 1)] for y in (0, 1)] for x in (0, 1)]
)
# znak iloczynu wyników dla korelatora
SIGN_AB = np.outer(SIGNS, SIGNS)


@dataclass(frozen=True)
class DeterministicStrategy:
    """
    @brief Lokalna strategia deterministyczna: a = alice_map[x], b = bob_map[y]
    """

    alice_map: tuple[int, int]
    bob_map: tuple[int, int]

    def __post_init__(self):
        for m in (self.alice_map, self.bob_map):
            if len(m) != 2 or any(v not in (0, 1) for v in m):
                raise ValueError(f"strategy map must be a total function {{0,1}}->{{0,1}}, got {m}")
        object.__setattr__(self, "alice_map", tuple(self.alice_map))
        object.__setattr__(self, "bob_map", tuple(self.bob_map))

    def box(self) -> np.ndarray:
        p = np.zeros((2, 2, 2, 2))
        for x, y in itertools.product((0, 1), repeat=2):
            p[x, y, self.alice_map[x], self.bob_map[y]] = 1.0
        return p

    def label(self) -> str:
        return f"a={self.alice_map[0]}{self.alice_map[1]} b={self.bob_map[0]}{self.bob_map[1]}"


def all_strategies() -> list[DeterministicStrategy]:
    maps = list(itertools.product((0, 1), repeat=2))
    return [DeterministicStrategy(a, b) for a in maps for b in maps]


@dataclass(frozen=True)
class ChshSettings:
    """Kąty pomiarów: A, A′ dla Alicji (x = 0, 1), B, B′ dla Boba (y = 0, 1)."""

    a: AngleBasis
    a_prime: AngleBasis
    b: AngleBasis
    b_prime: AngleBasis

    @classmethod
    def from_angles(cls, a: float, a_prime: float, b: float, b_prime: float) -> "ChshSettings":
        return cls(AngleBasis(a), AngleBasis(a_prime), AngleBasis(b), AngleBasis(b_prime))

    def pairs(self) -> list[tuple[AngleBasis, AngleBasis]]:
        """Kolejność składników: (A,B), (A,B′), (A′,B), (A′,B′)."""
        return [(self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime)]

    def to_dict(self) -> dict:
        return {"A": self.a.theta, "A_prime": self.a_prime.theta, "B": self.b.theta, "B_prime": self.b_prime.theta}


@dataclass(frozen=True)
class ChshResult:
    S: float
    per_term: tuple[CorrelatorEstimate, ...]
    success_prob: float
    strategy_class: str
    cross_check: tuple[CorrelatorEstimate, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy_class not in STRATEGY_CLASSES:
            raise ValueError(f"unknown strategy class: {self.strategy_class}")
        e = [t.value for t in self.per_term]
        if len(e) != 4 or abs(self.S - (e[0] + e[1] + e[2] - e[3])) > 1e-12:
            raise ValueError("S is not E1 + E2 + E3 - E4 of its own terms")
        if not 0.0 <= self.success_prob <= 1.0 + 1e-12:
            raise ValueError(f"success probability out of [0, 1]: {self.success_prob!r}")

    @property
    def abs_S(self) -> float:
        return abs(self.S)

    def to_dict(self) -> dict:
        d = {
            "S": self.S,
            "abs_S": self.abs_S,
            "success_prob": self.success_prob,
            "strategy_class": self.strategy_class,
            "per_term": [t.to_dict() for t in self.per_term],
        }
        if self.cross_check:
            d["cross_check"] = [t.to_dict() for t in self.cross_check]
        d.update(self.meta)
        return d


def box_correlators(box: np.ndarray) -> np.ndarray:
    """
    @brief Korelatory E[x, y] pudełka P(a, b | x, y)

    Każdy kubełek (x, y) jest normalizowany osobno, więc wejściem mogą być
    też nieznormalizowane wagi.
    """
    p = np.asarray(box, dtype=np.float64)
    if p.shape != (2, 2, 2, 2):
        raise ValueError(f"box must have shape (2, 2, 2, 2), got {p.shape}")
    totals = p.sum(axis=(2, 3))
    if np.any(totals <= 0):
        raise ValueError("box has an input pair with no weight")
    return np.einsum("xyab,ab->xy", p, SIGN_AB) / totals


def box_chsh(box: np.ndarray) -> tuple[float, float]:
    """
    @brief S i prawdopodobieństwo wygranej dla dowolnego pudełka P(a, b | x, y)

    S = E00 + E01 + E10 - E11, wygrana = ¼ Σ P(a ⊕ b = x ∧ y | x, y)
    przy jednostajnych wejściach. Dla takich pudełek S = 8·wygrana - 4.

    @param box Tablica P[x, y, a, b] (lub wagi, normalizowane per (x, y))
    @return (S, success)
    @throws ValueError Przy złym kształcie lub pustym kubełku
    """
    e = box_correlators(box)
    p = np.asarray(box, dtype=np.float64)
    totals = p.sum(axis=(2, 3))
    wins = np.einsum("xyab,xyab->xy", p, PREDICATE) / totals
    s = float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])
    return s, float(wins.mean())


def _box_result(box: np.ndarray, strategy_class: str, meta: dict | None = None) -> ChshResult:
    e = box_correlators(box)
    s, success = box_chsh(box)
    terms = tuple(CorrelatorEstimate(float(e[x, y]), "analytic", 0, 0.0) for x, y in ((0, 0), (0, 1), (1, 0), (1, 1)))
    return ChshResult(s, terms, success, strategy_class, meta=meta or {})


@dataclass(frozen=True)
class LhvSummary:
    max_S: float
    min_S: float
    max_success: float
    argmax: tuple[DeterministicStrategy, ...]
    n_strategies: int
    rows: tuple[dict, ...]
    consistent: bool


def lhv_exhaustive() -> LhvSummary:
    """
    @brief Przegląd wszystkich 16 lokalnych strategii deterministycznych

    Strategie z losowością wspólną są mieszaninami wypukłymi
    deterministycznych, więc nie przekraczają znalezionego maksimum.

    @return LhvSummary: max S = 2, min S = -2, max wygrana = 0.75
    """
    rows = []
    results = []
    for st in all_strategies():
        s, success = box_chsh(st.box())
        results.append((st, s, success))
        rows.append({"strategy": st.label(), "S": s, "success": success})

    max_s = max(s for _, s, _ in results)
    min_s = min(s for _, s, _ in results)
    max_success = max(p for _, _, p in results)
    argmax = tuple(st for st, s, _ in results if s == max_s)
    consistent = all(s == 8.0 * p - 4.0 for _, s, p in results)

    return LhvSummary(max_s, min_s, max_success, argmax, len({(st.alice_map, st.bob_map) for st, _, _ in results}),
                      tuple(rows), consistent)


def quantum_chsh(
    settings: ChshSettings,
    n_samples: int = 0,
    rng: np.random.Generator | None = None,
) -> ChshResult:
    """
    @brief CHSH dla singletu przy zadanych kątach

    Korelatory liczone analitycznie z reguły Borna; opcjonalnie każdy
    jest jeszcze próbkowany n_samples razy (cross_check). Wygrana liczona
    bezpośrednio z tabel prawdopodobieństw.

    @param settings Kąty A, A′, B, B′
    @param n_samples Liczba próbek na ustawienie (0 = bez sprawdzenia Monte Carlo)
    @param rng Generator dla próbkowania
    @return ChshResult
    """
    terms = tuple(correlator(a, b) for a, b in settings.pairs())
    s = terms[0].value + terms[1].value + terms[2].value - terms[3].value

    tables = [born_tables(a.theta, b.theta) for a, b in settings.pairs()]
    box = np.stack(tables).reshape(2, 2, 2, 2)
    success = float(np.einsum("xyab,xyab->xy", box, PREDICATE).mean())

    cross = ()
    if n_samples > 0:
        cross = tuple(correlator(a, b, n_samples=n_samples, rng=rng) for a, b in settings.pairs())

    return ChshResult(s, terms, success, "quantum", cross_check=cross, meta={"settings": settings.to_dict()})


def chsh_values(a_prime, b, b_prime, a=0.0) -> np.ndarray:
    """S(A, A′, B, B′) dla singletu, wektorowo po tablicach kątów."""
    e = [
        correlation_from_tables(born_tables(x, y))
        for x, y in ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))
    ]
    return e[0] + e[1] + e[2] - e[3]


@dataclass(frozen=True)
class QuantumOptimum:
    settings: ChshSettings
    S_max: float
    success: float
    grid_points: int
    resolution: float
    refine: dict

    def to_dict(self) -> dict:
        return {
            "settings": self.settings.to_dict(),
            "S_max": self.S_max,
            "success": self.success,
            "grid_points": self.grid_points,
            "resolution": self.resolution,
            "refine_iterations": self.refine["iterations"],
        }


def quantum_optimize(
    restrict_a_prime: bool = False,
    grid_steps: int = 32,
    resolution: float = 1e-3,
    seed: int | None = 0,
) -> QuantumOptimum:
    """
    @brief Szuka kątów maksymalizujących S dla singletu

    A jest ustalone na 0 (S zależy tylko od różnic kątów). Najpierw
    siatka grid_steps punktów na wymiar w [0, π), potem przybliżanie:
    krok /5, 11 punktów na wymiar wokół najlepszego punktu, aż krok
    ≤ resolution. Na koniec hill_climb do kroku 1e-10.
    Przy restrict_a_prime A′ = A i optymalizowane są tylko B, B′.

    @param restrict_a_prime Czy wymusić A′ = A
    @param grid_steps Liczba punktów siatki zgrubnej na wymiar
    @param resolution Docelowy krok siatki (rad)
    @param seed Ziarno dla hill_climb
    @return QuantumOptimum z S_max i wygraną (S + 4)/8
    """
    t0 = time.perf_counter()
    dim = 2 if restrict_a_prime else 3

    def objective(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if restrict_a_prime:
            return chsh_values(0.0, v[..., 0], v[..., 1])
        return chsh_values(v[..., 0], v[..., 1], v[..., 2])

    def search(axes: list[np.ndarray]) -> tuple[np.ndarray, int]:
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = objective(mesh)
        idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
        return mesh[idx], int(vals.size)

    step = np.pi / grid_steps
    axis = np.arange(grid_steps) * step
    best, points = search([axis] * dim)

    while step > resolution:
        step /= 5.0
        offsets = np.arange(-5, 6) * step
        best, n = search([best[i] + offsets for i in range(dim)])
        points += n

    refined = hill_climb(lambda v: float(objective(v)), best, seed=seed, step=step, min_step=1e-10)
    v = refined["point"]

    if restrict_a_prime:
        settings = ChshSettings.from_angles(0.0, 0.0, float(v[0]), float(v[1]))
    else:
        settings = ChshSettings.from_angles(0.0, float(v[0]), float(v[1]), float(v[2]))
    s_max = float(refined["objective"])

    logger.info(
        "quantum optimize (restricted=%s): S=%.12f after %d grid points, %d refine steps, %d ms",
        restrict_a_prime, s_max, points, refined["iterations"], int((time.perf_counter() - t0) * 1000),
    )
    return QuantumOptimum(settings, s_max, (s_max + 4.0) / 8.0, points, step, refined)


def record_box_weights(record: ExperimentRecord) -> np.ndarray:
    """
    @brief Wagi W[x, y, a, b] z par jednego eksperymentu

    Każda runda wspólna każdej pary dodaje wagę pary do swojego kubełka.
    """
    w = np.zeros((2, 2, 2, 2))
    for pair in record.pairs:
        for x, a, y, b in pair.rounds:
            w[x, y, a, b] += pair.pair_weight
    return w


def complete_box(weights: np.ndarray, **kwargs) -> tuple[np.ndarray, list[list[int]]]:
    """
    @brief Uzupełnia kubełki (x, y), których losowanie wejść nie trafiło

    Silnik jest deterministyczny dla zadanych wejść, więc brakujący
    kubełek dostaje wagi jednej rundy run_protocol((x,), (y,)).

    @param weights Wagi W[x, y, a, b]
    @param kwargs Parametry run_protocol (reguła, geometria)
    @return (uzupełnione wagi, lista uzupełnionych par [x, y])
    """
    w = np.array(weights, dtype=np.float64)
    if w.shape != (2, 2, 2, 2):
        raise ValueError(f"box must have shape (2, 2, 2, 2), got {w.shape}")
    filled = []
    totals = w.sum(axis=(2, 3))
    for x, y in itertools.product((0, 1), repeat=2):
        if totals[x, y] <= 0:
            w += record_box_weights(run_protocol((x,), (y,), **kwargs))
            filled.append([x, y])
    if filled:
        logger.debug("filled input pairs %s with deterministic runs", filled)
    return w, filled


def parallel_lives_chsh(
    n_trials: int,
    rng: np.random.Generator,
    n_rounds: int = 1,
    check_locality: bool = True,
    audit_eps: float = AUDIT_EPS,
    **kwargs,
) -> ChshResult:
    """
    @brief CHSH dla mechanizmu równoległych żyć

    Uruchamia n_trials eksperymentów z wejściami z rng, sumuje wagi par
    w kubełkach (x, y) i liczy S oraz wygraną jak dla pudełka. Pary
    wejść, których losowanie nie trafiło, są uzupełniane przez
    complete_box. Opcjonalnie audytuje log każdego wylosowanego eksperymentu.

    @param n_trials Liczba eksperymentów (≥ 1)
    @param rng Generator numpy
    @param n_rounds Liczba rund na eksperyment
    @param check_locality Czy audytować logi zdarzeń
    @param audit_eps Tolerancja czasu w audycie
    @return ChshResult; meta zawiera n_trials, uzupełnione pary i wynik audytu
    @throws ValueError Gdy n_trials < 1
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")

    weights = np.zeros((2, 2, 2, 2))
    audits_passed = 0
    c = float(kwargs.get("c", 1.0))
    for _ in range(n_trials):
        rec = run_experiment(n_rounds, rng, **kwargs)
        weights += record_box_weights(rec)
        if check_locality and audit(rec.events, c=c, eps=audit_eps).passed and sites_isolated(rec.events):
            audits_passed += 1

    weights, filled = complete_box(weights, **kwargs)

    meta = {"n_trials": n_trials, "n_rounds": n_rounds, "filled_pairs": filled}
    if check_locality:
        meta["audits_passed"] = audits_passed
    return _box_result(weights, "parallel_lives", meta)


def lhv_result(strategy: DeterministicStrategy) -> ChshResult:
    return _box_result(strategy.box(), "lhv", {"strategy": strategy.label()})
