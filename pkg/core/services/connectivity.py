from __future__ import annotations

from collections import deque
from typing import Hashable, Iterable, Sequence


def _build_adj(
    nodes: Sequence[Hashable],
    edges: Iterable[tuple[Hashable, Hashable]],
) -> dict[Hashable, list[Hashable]]:
    """
    @brief Buduje listę sąsiedztwa grafu nieskierowanego

    Krawędzie do węzłów spoza `nodes` są pomijane (np. zależności
    od zdarzeń po spotkaniu, gdy badamy tylko fazę przed spotkaniem).

    @param nodes Węzły grafu
    @param edges Krawędzie (u, v)
    @return Słownik węzeł -> lista sąsiadów
    """
    adj: dict[Hashable, list[Hashable]] = {v: [] for v in nodes}
    for u, v in edges:
        if u not in adj or v not in adj:
            continue
        adj[u].append(v)
        adj[v].append(u)
    return adj


def components(
    nodes: Sequence[Hashable],
    edges: Iterable[tuple[Hashable, Hashable]],
) -> list[list[Hashable]]:
    """
    @brief Wyznacza spójne składowe grafu metodą BFS

    Kolejność składowych i węzłów w składowej wynika z kolejności `nodes`,
    więc wynik jest deterministyczny.

    @param nodes Węzły grafu
    @param edges Krawędzie (u, v)
    @return Lista składowych, każda jako lista węzłów
    """
    adj = _build_adj(nodes, edges)
    seen: set[Hashable] = set()
    comps: list[list[Hashable]] = []

    for s in nodes:
        if s in seen:
            continue

        q = deque([s])
        seen.add(s)
        comp = [s]

        while q:
            x = q.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    q.append(y)
                    comp.append(y)

        comps.append(comp)

    return comps
