"""Trap lattices and greedy lattice subgraph (GLS) embedding."""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import InteractionGraph

GEOMETRIES = ("triangular", "square")
_NEXT_NEAREST = {"triangular": math.sqrt(3.0), "square": math.sqrt(2.0)}


class EmbeddingConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Fixed trap positions in micrometres."""

    positions: np.ndarray
    geometry: str = "triangular"
    spacing: float = 7.0
    rows: int = 1
    cols: int = 1

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def next_nearest_distance(self) -> float:
        return _NEXT_NEAREST[self.geometry] * self.spacing

    def check_blockade_radius(self, blockade_radius: float) -> None:
        if not (self.spacing < blockade_radius < self.next_nearest_distance):
            raise EmbeddingConfigError(
                f"blockade radius {blockade_radius} must lie strictly between the spacing "
                f"{self.spacing} and the next-nearest distance {self.next_nearest_distance:.4f}"
            )

    def neighbor_table(self, blockade_radius: float) -> list[np.ndarray]:
        """Traps closer than the blockade radius, nearest first, ties by index."""
        d = np.linalg.norm(self.positions[:, None, :] - self.positions[None, :, :], axis=-1)
        out = []
        for i in range(len(self)):
            idx = np.flatnonzero((d[i] < blockade_radius) & (np.arange(len(self)) != i))
            out.append(idx[np.lexsort((idx, d[i, idx]))])
        return out


def make_lattice(geometry: str = "triangular", spacing: float = 7.0, rows: int = 9,
                 cols: int | None = None) -> Lattice:
    """Rectangular patch of a triangular or square lattice, row-major trap order."""
    if geometry not in GEOMETRIES:
        raise ValueError(f"unknown lattice geometry {geometry!r}")
    cols = rows if cols is None else cols
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if rows < 1 or cols < 1:
        raise ValueError("lattice extent must be at least 1x1")
    pts = []
    for r in range(rows):
        for c in range(cols):
            if geometry == "triangular":
                pts.append(((c + 0.5 * (r % 2)) * spacing, r * spacing * math.sqrt(3.0) / 2.0))
            else:
                pts.append((c * spacing, r * spacing))
    pos = np.array(pts, dtype=np.float64)
    pos.setflags(write=False)
    return Lattice(pos, geometry, float(spacing), rows, cols)


@dataclass
class Embedding:
    """Graph vertices placed on lattice traps, in placement order."""

    vertices: list[int]
    traps: list[int]
    positions: np.ndarray
    blockade_radius: float
    discarded: list[int] = field(default_factory=list)
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def vertex_map(self) -> dict[int, int]:
        return dict(zip(self.vertices, self.traps))

    def unit_disk_adjacency(self) -> np.ndarray:
        d = np.linalg.norm(self.positions[:, None, :] - self.positions[None, :, :], axis=-1)
        adj = d < self.blockade_radius
        np.fill_diagonal(adj, False)
        return adj

    def to_dict(self) -> dict:
        return {
            "trap_coords": self.positions.tolist(),
            "vertex_map": {str(v): int(t) for v, t in zip(self.vertices, self.traps)},
            "vertices": [int(v) for v in self.vertices],
            "R_b": self.blockade_radius,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Embedding:
        vertices = [int(v) for v in data.get("vertices", data["vertex_map"].keys())]
        traps = [int(data["vertex_map"][str(v)]) for v in vertices]
        return cls(vertices, traps, np.asarray(data["trap_coords"], dtype=np.float64).reshape(-1, 2),
                   float(data["R_b"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def gls_map(g: InteractionGraph, lattice: Lattice, blockade_radius: float | None = None,
            seed: int | None = 0, max_atoms: int | None = None) -> Embedding:
    """Grow a unit-disk-consistent induced subgraph of ``g`` on ``lattice``.

    A random vertex goes on a random trap; then, breadth-first over placed
    vertices, each unmapped neighbour (heaviest first) takes the first free
    adjacent trap whose blockade pattern against every placed atom matches
    the graph exactly. Neighbours with no such trap are dropped for good.
    """
    if g.n == 0:
        raise ValueError("cannot embed an empty graph")
    R_b = 1.2 * lattice.spacing if blockade_radius is None else float(blockade_radius)
    lattice.check_blockade_radius(R_b)
    rng = np.random.default_rng(seed)
    start_trap = int(rng.integers(len(lattice)))
    start_vertex = int(rng.integers(g.n))
    near = lattice.neighbor_table(R_b)
    pos = lattice.positions
    adj = g.adjacency
    w = g.weights

    placed_v = [start_vertex]
    placed_t = [start_trap]
    trap_of = {start_vertex: start_trap}
    occupied = {start_trap}
    discarded: set[int] = set()
    queue = deque([start_vertex])
    cap = max_atoms if max_atoms is not None else len(lattice)

    while queue and len(placed_v) < cap:
        u = queue.popleft()
        nbrs = [int(v) for v in g.neighbors(u) if v not in trap_of and v not in discarded]
        nbrs.sort(key=lambda v: (-w[v], v))
        for v in nbrs:
            if len(placed_v) >= cap:
                break
            want = adj[v, placed_v]
            chosen = None
            for t in near[trap_of[u]]:
                t = int(t)
                if t in occupied:
                    continue
                close = np.linalg.norm(pos[placed_t] - pos[t], axis=1) < R_b
                if np.array_equal(close, want):
                    chosen = t
                    break
            if chosen is None:
                discarded.add(v)
                continue
            placed_v.append(v)
            placed_t.append(chosen)
            trap_of[v] = chosen
            occupied.add(chosen)
            queue.append(v)

    return Embedding(placed_v, placed_t, pos[placed_t].copy(), R_b, sorted(discarded), seed)


def sample_subgraphs(g: InteractionGraph, lattice: Lattice, blockade_radius: float | None,
                     k: int, seeds: Sequence[int], max_atoms: int | None = None) -> list[Embedding]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(seeds) < k:
        raise ValueError("need one seed per subgraph")
    return [gls_map(g, lattice, blockade_radius, int(s), max_atoms) for s in seeds[:k]]
