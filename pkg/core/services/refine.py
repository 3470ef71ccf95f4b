from __future__ import annotations

import random
import time
from typing import Callable, Sequence

import numpy as np


def hill_climb(
    objective: Callable[[np.ndarray], float],
    start: Sequence[float],
    seed: int | None,
    step: float,
    min_step: float = 1e-10,
    iterations: int = 50_000,
    mode: str = "max",
    patience: int | None = None,
) -> dict:
    """
    @brief Lokalna optymalizacja metodą hill climbing w przestrzeni ciągłej

    Ruch: losowa współrzędna przesunięta o ±step. Ruch jest akceptowany
    wyłącznie wtedy, gdy poprawia wartość celu zgodnie z trybem `mode`.
    Po `patience` kolejnych odrzuconych ruchach krok jest połowiony;
    przebieg kończy się, gdy krok spadnie poniżej min_step albo
    wyczerpie się limit iteracji.

    @param objective Funkcja celu punktu (tablica numpy)
    @param start Punkt startowy
    @param seed Ziarno losowe
    @param step Krok początkowy
    @param min_step Krok końcowy
    @param iterations Maksymalna liczba prób ruchu
    @param mode "max" (maksymalizacja) lub "min"
    @param patience Liczba porażek przed zmniejszeniem kroku; domyślnie 4·wymiar
    @return Słownik z najlepszym punktem i metadanymi przebiegu
    """
    t0 = time.perf_counter()
    rnd = random.Random(seed)

    cur = np.array(start, dtype=np.float64)
    cur_val = float(objective(cur))
    dim = cur.size
    patience = patience if patience is not None else 4 * dim

    accepted = 0
    fails = 0
    it = 0
    while it < iterations and step >= min_step:
        it += 1
        cand = cur.copy()
        cand[rnd.randrange(dim)] += step if rnd.random() < 0.5 else -step
        cand_val = float(objective(cand))

        better = cand_val < cur_val if mode == "min" else cand_val > cur_val
        if better:
            cur, cur_val = cand, cand_val
            accepted += 1
            fails = 0
        else:
            fails += 1
            if fails >= patience:
                step /= 2.0
                fails = 0

    return {
        "point": cur,
        "objective": cur_val,
        "iterations": it,
        "accepted_moves": accepted,
        "final_step": step,
        "meta_params": {"seed": seed, "mode": mode, "patience": patience, "min_step": min_step},
        "time_ms": int((time.perf_counter() - t0) * 1000),
    }
