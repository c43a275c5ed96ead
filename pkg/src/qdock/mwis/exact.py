"""Exact MWIS by branch and bound on the complement's maximum weight clique."""
from __future__ import annotations

import time

import numpy as np

from ..graph import InteractionGraph, bits_to_list
from .solution import IndependentSetSolution


class _Timeout(Exception):
    pass


class _CliqueSearch:
    """Weighted clique search with a colour-class bound.

    Vertices are relabelled so bit order equals the colouring order (heaviest
    first). A greedy sequential colouring of the candidates bounds any clique
    drawn from colour classes <= c by the sum of each class's heaviest weight.
    """

    def __init__(self, nbr: list[int], weights: np.ndarray, deadline: float | None):
        self.n = len(nbr)
        order = sorted(range(self.n), key=lambda v: (-weights[v], -bin(nbr[v]).count("1"), v))
        self.old = order
        pos = {v: i for i, v in enumerate(order)}
        self.w = [float(weights[v]) for v in order]
        self.nbr = []
        for v in order:
            m = 0
            for u in bits_to_list(nbr[v]):
                m |= 1 << pos[u]
            self.nbr.append(m)
        self.deadline = deadline
        self.nodes = 0
        self.best_w = -1.0
        self.best = 0

    def seed(self, members: list[int], weight: float) -> None:
        pos = {v: i for i, v in enumerate(self.old)}
        self.best = sum(1 << pos[v] for v in members)
        self.best_w = weight

    def _color(self, P: int):
        nbr, w = self.nbr, self.w
        verts, bounds = [], []
        total = 0.0
        Q = P
        while Q:
            avail = Q
            cls = []
            top = 0.0
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                avail &= ~nbr[v] & ~low
                Q &= ~low
                cls.append(v)
                if w[v] > top:
                    top = w[v]
            total += top
            verts.extend(cls)
            bounds.extend([total] * len(cls))
        return verts, bounds

    def expand(self, C: int, Cw: float, P: int) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % 512 == 0 and time.monotonic() > self.deadline:
            raise _Timeout
        verts, bounds = self._color(P)
        for i in range(len(verts) - 1, -1, -1):
            if Cw + bounds[i] <= self.best_w + 1e-12:
                return
            v = verts[i]
            bit = 1 << v
            newC, newW = C | bit, Cw + self.w[v]
            newP = P & self.nbr[v]
            if newP:
                self.expand(newC, newW, newP)
            elif newW > self.best_w + 1e-12:
                self.best_w, self.best = newW, newC
            P &= ~bit

    def run(self):
        if self.n:
            self.expand(0, 0.0, (1 << self.n) - 1)
        return sorted(self.old[i] for i in bits_to_list(self.best))


def solve_exact(g: InteractionGraph, timeout: float | None = None) -> IndependentSetSolution:
    """Provably optimal maximum weight independent set.

    On timeout the best set found so far is returned with ``optimal=False``.
    """
    from .greedy import solve_greedy

    start = time.monotonic()
    if g.n == 0:
        return IndependentSetSolution.build(g, [], "exact", optimal=True, nodes=0)
    comp = g.complement()
    search = _CliqueSearch(comp.bitsets(), g.weights, None if timeout is None else start + timeout)
    warm = solve_greedy(g)
    search.seed(list(warm.vertices), warm.weight - 1e-9)
    optimal = True
    try:
        members = search.run()
    except _Timeout:
        optimal = False
        members = sorted(search.old[i] for i in bits_to_list(search.best))
    return IndependentSetSolution.build(g, members, "exact", optimal=optimal, nodes=search.nodes)


def maximal_independent_sets(g: InteractionGraph):
    """Yield every maximal independent set (Bron-Kerbosch with pivoting on the complement)."""
    comp = g.complement().bitsets()

    def bk(R: int, P: int, X: int):
        if not P and not X:
            yield R
            return
        pivot_pool = P | X
        u = max(bits_to_list(pivot_pool), key=lambda x: bin(P & comp[x]).count("1"))
        for v in bits_to_list(P & ~comp[u]):
            bit = 1 << v
            yield from bk(R | bit, P & comp[v], X & comp[v])
            P &= ~bit
            X |= bit

    if g.n == 0:
        yield ()
        return
    for mask in bk(0, (1 << g.n) - 1, 0):
        yield tuple(bits_to_list(mask))


def top_independent_sets(g: InteractionGraph, s: int) -> list[tuple[int, ...]]:
    """The ``s`` heaviest maximal independent sets, ties broken lexicographically."""
    sets = list(maximal_independent_sets(g))
    sets.sort(key=lambda m: (-g.weight_of(m), m))
    return sets[:s]


def brute_force_mwis(g: InteractionGraph) -> tuple[float, tuple[int, ...]]:
    """Enumerate all 2^n subsets; oracle for small graphs."""
    n = g.n
    if n > 22:
        raise ValueError("brute force limited to 22 vertices")
    nbr = g.bitsets()
    best_w, best = 0.0, ()
    w = g.weights
    for mask in range(1 << n):
        ok = True
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            if nbr[v] & mask:
                ok = False
                break
            m ^= low
        if ok:
            members = tuple(bits_to_list(mask))
            total = float(w[list(members)].sum()) if members else 0.0
            if total > best_w + 1e-12:
                best_w, best = total, members
    return best_w, best
