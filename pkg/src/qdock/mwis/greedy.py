from __future__ import annotations

import numpy as np

from ..graph import InteractionGraph
from .solution import IndependentSetSolution


def greedy_order(g: InteractionGraph, candidates=None) -> list[int]:
    """Repeatedly take argmax w / (residual degree + 1), lowest index on ties."""
    alive = np.ones(g.n, dtype=bool) if candidates is None else np.asarray(candidates, dtype=bool).copy()
    adj = g.adjacency
    deg = (adj & alive[None, :]).sum(axis=1).astype(np.float64)
    chosen = []
    while alive.any():
        score = np.where(alive, g.weights / (deg + 1.0), -np.inf)
        v = int(np.argmax(score))
        chosen.append(v)
        removed = alive & (adj[v] | (np.arange(g.n) == v))
        alive &= ~removed
        deg -= adj[:, removed].sum(axis=1)
    return chosen


def solve_greedy(g: InteractionGraph) -> IndependentSetSolution:
    """Weight-to-degree greedy maximal independent set."""
    return IndependentSetSolution.build(g, greedy_order(g), "greedy",
                                        tie_break="lowest index", ratio="w/(deg+1)")


def augment_to_maximal(g: InteractionGraph, members) -> tuple[list[int], bool]:
    """Add non-conflicting vertices by descending weight (ties by index) until maximal."""
    chosen = sorted(set(int(v) for v in members))
    blocked = np.zeros(g.n, dtype=bool)
    for v in chosen:
        blocked[v] = True
        blocked |= g.adjacency[v]
    added = False
    for v in sorted(range(g.n), key=lambda u: (-g.weights[u], u)):
        if not blocked[v]:
            chosen.append(v)
            blocked[v] = True
            blocked |= g.adjacency[v]
            added = True
    return sorted(chosen), added
