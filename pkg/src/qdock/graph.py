"""Weighted undirected simple graphs shared by the builder and the solvers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

KINDS = ("BIG", "complement")


@dataclass(eq=False)
class InteractionGraph:
    """Vertex-weighted simple graph with a dense boolean adjacency matrix.

    ``labels[i]`` is the ``(ligand_point_id, receptor_point_id)`` pair behind
    vertex ``i`` when the graph came from a docking instance.
    """

    weights: np.ndarray
    adjacency: np.ndarray
    kind: str = "complement"
    labels: list[tuple[str, str]] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        adj = np.asarray(self.adjacency, dtype=bool)
        n = len(self.weights)
        if adj.shape != (n, n):
            raise ValueError(f"adjacency shape {adj.shape} does not match {n} weights")
        if np.any(np.diag(adj)):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if self.kind not in KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels must have one entry per vertex")
        self.adjacency = adj
        self._bitsets = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], weights=None, **kwargs):
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            adj[u, v] = adj[v, u] = True
        if weights is None:
            weights = np.ones(n)
        return cls(weights, adj, **kwargs)

    @property
    def n(self) -> int:
        return len(self.weights)

    def __len__(self) -> int:
        return self.n

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.adjacency)) // 2

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[v])

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def bitsets(self) -> list[int]:
        """Neighbourhoods as Python int bitsets (bit j set when j is adjacent)."""
        if self._bitsets is None:
            packed = np.packbits(self.adjacency, axis=1, bitorder="little")
            self._bitsets = [int.from_bytes(row.tobytes(), "little") for row in packed]
        return self._bitsets

    def subgraph(self, vertices: Sequence[int]) -> InteractionGraph:
        idx = np.asarray(vertices, dtype=np.int64)
        labels = [self.labels[i] for i in idx] if self.labels is not None else None
        return InteractionGraph(
            self.weights[idx],
            self.adjacency[np.ix_(idx, idx)],
            kind=self.kind,
            labels=labels,
            metadata=dict(self.metadata),
        )

    def complement(self) -> InteractionGraph:
        adj = ~self.adjacency
        np.fill_diagonal(adj, False)
        kind = "complement" if self.kind == "BIG" else "BIG"
        labels = list(self.labels) if self.labels is not None else None
        return InteractionGraph(self.weights.copy(), adj, kind=kind, labels=labels,
                                metadata=dict(self.metadata))

    def weight_of(self, vertices: Iterable[int]) -> float:
        idx = list(vertices)
        return float(self.weights[idx].sum()) if idx else 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.adjacency, other.adjacency)
            and self.labels == other.labels
        )


def bits_to_list(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def random_graph(n: int, p: float, rng, weight_range=(0.05, 1.0)) -> InteractionGraph:
    """Erdős–Rényi ``G(n, p)`` with uniform vertex weights; used by tests and benchmarks."""
    upper = np.triu(rng.random((n, n)) < p, 1)
    weights = rng.uniform(*weight_range, size=n)
    return InteractionGraph(weights, upper | upper.T)
