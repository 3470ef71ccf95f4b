from __future__ import annotations

import logging
import multiprocessing as mp
import time
from dataclasses import dataclass

import numpy as np

from .chsh import record_box_weights
from .locality import AUDIT_EPS, audit, plant_signal, sites_isolated
from .parallel_lives import (
    ALICE,
    BOB,
    is_bijection,
    output_marginals,
    pr_success_probability,
    run_experiment,
    run_protocol,
    unilateral_partner,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentTask:
    index: int
    n_rounds: int
    seed: np.random.SeedSequence
    rule: str = "pr"
    separation: float = 10.0
    c: float = 1.0
    flash_delay: float = 0.3
    audit_eps: float = AUDIT_EPS


def _summarize(task: ExperimentTask) -> dict:
    """
    @brief Przebieg jednego eksperymentu i jego krótkie podsumowanie

    Funkcja jest celem dla multiprocessing.Pool.map, więc zwraca tylko
    małe, serializowalne wartości.
    """
    rng = np.random.default_rng(task.seed)
    rec = run_experiment(task.n_rounds, rng, rule=task.rule,
                         separation=task.separation, c=task.c, flash_delay=task.flash_delay)
    rep = audit(rec.events, c=task.c, eps=task.audit_eps)

    marg = output_marginals(rec, ALICE) + output_marginals(rec, BOB)
    unilateral = all(
        unilateral_partner(p.alice_bubble, rec.x_bits, rec.y_bits) == p.bob_bubble.outputs
        for p in rec.pairs
    )
    again = run_protocol(rec.x_bits, rec.y_bits, rule=task.rule, separation=task.separation,
                         c=task.c, flash_delay=task.flash_delay, order="alice_first")

    return {
        "index": task.index,
        "rounds": task.n_rounds,
        "success": pr_success_probability(rec),
        "all_pairs_satisfied": all(p.satisfied for p in rec.pairs),
        "bijection": is_bijection(rec.alice, rec.bob, list(rec.pairs)),
        "weight_total": float(sum(p.pair_weight for p in rec.pairs)),
        "marginals_uniform": all(m == 0.5 for m in marg),
        "unilateral_matches": unilateral,
        "order_independent": again.to_dict(include_events=True) == rec.to_dict(include_events=True),
        "audit_passed": rep.passed,
        "violations": len(rep.violations),
        "isolated": sites_isolated(rec.events),
        "n_events": len(rec.events),
        "box": record_box_weights(rec).tolist(),
    }


def _fault_summary(task: ExperimentTask) -> dict:
    rng = np.random.default_rng(task.seed)
    rec = run_experiment(task.n_rounds, rng, rule=task.rule,
                         separation=task.separation, c=task.c, flash_delay=task.flash_delay)
    bad = plant_signal(rec.events, rng, c=task.c)
    rep = audit(bad, c=task.c, eps=task.audit_eps)
    return {
        "index": task.index,
        "rounds": task.n_rounds,
        "violations": len(rep.violations),
        "reasons": sorted({r for v in rep.violations for r in v.reasons}),
        "isolated": sites_isolated(bad),
    }


def make_tasks(
    seed: int,
    n_experiments: int,
    max_rounds: int,
    **kwargs,
) -> list[ExperimentTask]:
    """
    @brief Zadania z niezależnymi strumieniami losowymi (SeedSequence.spawn)

    Eksperyment i ma 1 + (i mod max_rounds) rund. Strumienie zależą tylko
    od ziarna i indeksu, więc wynik nie zależy od liczby procesów.
    """
    if n_experiments < 1:
        raise ValueError(f"n_experiments must be >= 1, got {n_experiments}")
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    children = np.random.SeedSequence(seed).spawn(n_experiments)
    return [ExperimentTask(i, 1 + i % max_rounds, s, **kwargs) for i, s in enumerate(children)]


def _map(fn, tasks: list[ExperimentTask], workers: int) -> list[dict]:
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with mp.Pool(processes=workers) as pool:
        return pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers)))


def run_sweep(
    seed: int,
    n_experiments: int,
    max_rounds: int,
    workers: int = 1,
    **kwargs,
) -> list[dict]:
    """
    @brief Seria eksperymentów równoległych żyć, opcjonalnie w wielu procesach

    @param seed Ziarno główne
    @param n_experiments Liczba eksperymentów
    @param max_rounds Maksymalna liczba rund
    @param workers Liczba procesów (1 = w bieżącym procesie)
    @return Podsumowania w kolejności indeksów
    """
    t0 = time.perf_counter()
    tasks = make_tasks(seed, n_experiments, max_rounds, **kwargs)
    out = _map(_summarize, tasks, workers)
    logger.info("sweep: %d experiments, %d worker(s), %d ms",
                len(out), workers, int((time.perf_counter() - t0) * 1000))
    return out


def run_fault_suite(
    seed: int,
    n_faults: int,
    max_rounds: int,
    workers: int = 1,
    **kwargs,
) -> list[dict]:
    """Logi z wstrzykniętym sygnałem; każdy musi dać co najmniej jedno naruszenie."""
    tasks = make_tasks(seed, n_faults, max_rounds, **kwargs)
    return _map(_fault_summary, tasks, workers)
