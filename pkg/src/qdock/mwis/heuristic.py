"""Lattice decomposition heuristic: breadth-first search over partial
independent sets, each level extended by MWIS solutions of embeddable
subgraphs of the residual graph.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..emulator import (AnnealSchedule, CapacityError, EmulatorConfig, IntegrationError,
                        Register, bitstring_to_state, evolve, sample)
from ..graph import InteractionGraph
from ..lattice import Embedding, Lattice, gls_map, make_lattice
from .exact import top_independent_sets
from .greedy import augment_to_maximal, greedy_order
from .solution import IndependentSetSolution

log = logging.getLogger(__name__)


@dataclass
class HeuristicConfig:
    k: int = 3
    s: int = 4
    l: int = 10
    subsolver: str = "quantum"
    mode: str = "tree"
    seed: int = 0
    max_atoms: int | None = None
    geometry: str = "triangular"
    spacing: float = 7.0
    lattice_rows: int = 9
    blockade_radius: float | None = None

    def __post_init__(self):
        if self.k < 1 or self.s < 1 or self.l < 1:
            raise ValueError("k, s and l must all be >= 1")
        if self.subsolver not in ("quantum", "exact"):
            raise ValueError("subsolver must be 'quantum' or 'exact'")
        if self.mode not in ("tree", "sequential"):
            raise ValueError("mode must be 'tree' or 'sequential'")

    def lattice(self) -> Lattice:
        return make_lattice(self.geometry, self.spacing, self.lattice_rows)

    def to_dict(self) -> dict:
        return asdict(self)


def default_subgraph_emulator() -> EmulatorConfig:
    return EmulatorConfig()


@dataclass(frozen=True)
class RankedSet:
    vertices: tuple[int, ...]  # graph vertex indices
    weight: float
    probability: float
    augmented: bool = False


@dataclass
class SubgraphResult:
    sets: list[RankedSet]
    fallback: bool = False
    diagnostics: dict = field(default_factory=dict)


def _embedded_graph(g: InteractionGraph, emb: Embedding) -> InteractionGraph:
    return g.subgraph(emb.vertices)


def solve_subgraph_quantum(emb: Embedding, weights, cfg: EmulatorConfig | None = None,
                           s: int = 1, seed: int | None = None) -> SubgraphResult:
    """Anneal the embedded register and rank the sampled independent sets.

    Non-independent samples are dropped; survivors are greedily completed to
    maximal sets of the embedded graph. Ranking: sample count, then weight,
    then bitstring. Returns at most ``s`` distinct sets.
    """
    cfg = cfg or default_subgraph_emulator()
    w = np.asarray(weights, dtype=np.float64)
    reg = Register.from_embedding(emb)
    ud = InteractionGraph(w, emb.unit_disk_adjacency())
    schedule = AnnealSchedule.standard(w, cfg)
    psi = evolve(reg, schedule, cfg)
    counts = sample(psi, cfg.n_shots, cfg.seed if seed is None else seed)
    nbr = ud.bitsets()
    shots = []
    for bits, c in counts.items():
        state = bitstring_to_state(bits)
        local = [i for i in range(ud.n) if state >> i & 1]
        if any(nbr[i] & state for i in local):
            continue
        shots.append((-c, -ud.weight_of(local), bits, local))
    shots.sort()
    out: list[RankedSet] = []
    seen = set()
    for negc, _, _, local in shots:
        full, added = augment_to_maximal(ud, local)
        key = tuple(full)
        if key in seen:
            continue
        seen.add(key)
        out.append(RankedSet(tuple(emb.vertices[i] for i in full), ud.weight_of(full),
                             -negc / cfg.n_shots, added))
        if len(out) == s:
            break
    diag = dict(psi.diagnostics, n_atoms=ud.n, distinct_samples=len(counts))
    if not out:
        local = sorted(greedy_order(ud))
        return SubgraphResult([RankedSet(tuple(emb.vertices[i] for i in local), ud.weight_of(local),
                                         0.0, True)], True, diag)
    return SubgraphResult(out, False, diag)


def solve_subgraph_exact(g: InteractionGraph, emb: Embedding, s: int = 1) -> SubgraphResult:
    """The ``s`` heaviest maximal independent sets of the embedded subgraph."""
    sub = _embedded_graph(g, emb)
    sets = top_independent_sets(sub, s)
    return SubgraphResult([
        RankedSet(tuple(emb.vertices[i] for i in m), sub.weight_of(m), 1.0) for m in sets
    ], False, {"n_atoms": sub.n})


@dataclass
class Branch:
    members: frozenset
    residual: np.ndarray
    weight: float
    order: int
    trace: list = field(default_factory=list)

    @property
    def done(self) -> bool:
        return not self.residual.any()


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]).generate_state(1)[0])


class DecompositionSolver:
    def __init__(self, g: InteractionGraph, hcfg: HeuristicConfig, ecfg: EmulatorConfig | None,
                 lattice: Lattice | None):
        self.g = g
        self.h = hcfg
        self.e = ecfg or default_subgraph_emulator()
        self.lattice = lattice or hcfg.lattice()
        self.cap = hcfg.max_atoms if hcfg.max_atoms is not None else self.e.max_qubits
        self.counter = 0
        self.errors: list[str] = []
        self.sizes: list[int] = []
        self.levels: list[dict] = []
        self.anneals = 0

    def _new_order(self) -> int:
        self.counter += 1
        return self.counter

    def _solve_one(self, sub: InteractionGraph, emb: Embedding, seed: int) -> SubgraphResult:
        self.sizes.append(len(emb))
        if self.h.subsolver == "exact":
            return solve_subgraph_exact(sub, emb, self.h.s)
        self.anneals += 1
        w = sub.weights[emb.vertices]
        cfg = replace(self.e, seed=seed)
        return solve_subgraph_quantum(emb, w, cfg, self.h.s)

    def _children(self, branch: Branch, level: int) -> list[Branch]:
        idx = np.flatnonzero(branch.residual)
        sub = self.g.subgraph(idx)
        embeddings = []
        for j in range(self.h.k):
            seed = derive_seed(self.h.seed, level, branch.order, j)
            embeddings.append((gls_map(sub, self.lattice, self.h.blockade_radius, seed, self.cap), seed))
        if self.h.mode == "sequential":
            embeddings = [max(embeddings, key=lambda es: len(es[0]))]
        children = []
        for emb, seed in embeddings:
            try:
                result = self._solve_one(sub, emb, derive_seed(seed, 1))
            except (CapacityError, IntegrationError) as exc:
                self.errors.append(f"level {level} branch {branch.order}: {exc}")
                continue
            picks = result.sets[:1] if self.h.mode == "sequential" else result.sets
            for ranked in picks:
                chosen = idx[list(ranked.vertices)]
                residual = branch.residual.copy()
                residual[chosen] = False
                residual &= ~self.g.adjacency[chosen].any(axis=0)
                children.append(Branch(
                    branch.members | frozenset(int(v) for v in chosen), residual,
                    branch.weight + float(self.g.weights[chosen].sum()), self._new_order(),
                    branch.trace + [{"level": level, "subgraph_size": len(emb), "seed": seed,
                                     "added": sorted(int(v) for v in chosen),
                                     "probability": ranked.probability,
                                     "fallback": result.fallback}],
                ))
        return children

    def run(self) -> IndependentSetSolution:
        g = self.g
        branches = [Branch(frozenset(), np.ones(g.n, dtype=bool), 0.0, 0)]
        level = 0
        while any(not b.done for b in branches):
            pool: list[Branch] = []
            for b in branches:
                if b.done:
                    pool.append(b)
                else:
                    pool.extend(self._children(b, level))
            if not pool:
                raise RuntimeError("every branch failed: " + "; ".join(self.errors[-3:]))
            unique: dict[frozenset, Branch] = {}
            for b in sorted(pool, key=lambda b: b.order):
                unique.setdefault(b.members, b)
            keep = 1 if self.h.mode == "sequential" else self.h.l
            ranked = sorted(unique.values(), key=lambda b: (-b.weight, int(b.residual.sum()), b.order))
            branches = ranked[:keep]
            self.levels.append({"level": level, "candidates": len(pool), "distinct": len(unique),
                                "kept": len(branches), "best_weight": branches[0].weight,
                                "open": sum(not b.done for b in branches)})
            level += 1
        best = min(branches, key=lambda b: (-b.weight, b.order))
        return IndependentSetSolution.build(
            g, best.members, "quantum-heuristic" if self.h.subsolver == "quantum" else "exact-heuristic",
            config=self.h.to_dict(), emulator=self.e.to_dict() if self.h.subsolver == "quantum" else None,
            branch_trace=best.trace, levels=self.levels, subgraph_sizes=self.sizes,
            anneals=self.anneals, errors=self.errors,
        )


def solve_decomposition(g: InteractionGraph, lattice: Lattice | None = None,
                        hcfg: HeuristicConfig | None = None,
                        ecfg: EmulatorConfig | None = None) -> IndependentSetSolution:
    """Approximate MWIS of ``g`` by merging subgraph solutions level by level.

    Each open branch samples ``k`` GLS subgraphs of its residual graph, keeps
    the ``s`` best sets of each, and the ``l`` heaviest branches survive the
    level. The search ends when no branch has residual vertices, so the
    result is always a maximal independent set.
    """
    hcfg = hcfg or HeuristicConfig()
    if g.n == 0:
        return IndependentSetSolution.build(g, [], "heuristic", config=hcfg.to_dict(),
                                            branch_trace=[], levels=[])
    return DecompositionSolver(g, hcfg, ecfg, lattice).run()
