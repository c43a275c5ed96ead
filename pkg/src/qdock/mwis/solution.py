from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..graph import InteractionGraph


@dataclass(frozen=True)
class Verification:
    independent: bool
    maximal: bool
    weight: float


def verify_solution(g: InteractionGraph, vertices: Iterable[int]) -> Verification:
    """Pairwise independence check, maximality as S plus N(S) covering V."""
    s = sorted(set(int(v) for v in vertices))
    if any(v < 0 or v >= g.n for v in s):
        raise ValueError("solution references a vertex outside the graph")
    idx = np.array(s, dtype=np.int64)
    independent = not g.adjacency[np.ix_(idx, idx)].any() if len(idx) else True
    covered = np.zeros(g.n, dtype=bool)
    if len(idx):
        covered[idx] = True
        covered |= g.adjacency[idx].any(axis=0)
    return Verification(bool(independent), bool(covered.all()), g.weight_of(s))


@dataclass
class IndependentSetSolution:
    vertices: tuple[int, ...]
    weight: float
    independent: bool
    maximal: bool
    method: str
    optimal: bool | None = None
    provenance: dict = field(default_factory=dict)

    @classmethod
    def build(cls, g: InteractionGraph, vertices: Iterable[int], method: str,
              optimal: bool | None = None, **provenance) -> IndependentSetSolution:
        vs = tuple(sorted(set(int(v) for v in vertices)))
        check = verify_solution(g, vs)
        return cls(vs, check.weight, check.independent, check.maximal, method, optimal, provenance)

    def to_dict(self, g: InteractionGraph | None = None) -> dict:
        d = {"vertices": list(self.vertices), "weight": self.weight,
             "independent": self.independent, "maximal": self.maximal,
             "method": self.method, "optimal": self.optimal, "provenance": self.provenance}
        if g is not None and g.labels is not None:
            d["contacts"] = [list(g.labels[v]) for v in self.vertices]
        return d
