"""Binding interaction graph construction and its complement."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import InteractionGraph
from .io import ConformerEnsemble, InputError, PharmacophorePoint
from .potentials import PotentialTable


@dataclass
class BigConfig:
    receptor_cutoff: float = 6.5
    epsilon: float = 1.0
    table: PotentialTable = field(default_factory=PotentialTable.default)
    allow_shared_points: bool = False
    prune_zero_weight: bool = False

    def __post_init__(self):
        if not self.receptor_cutoff > 0:
            raise ValueError("receptor_cutoff must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def record(self) -> dict:
        return {"receptor_cutoff": self.receptor_cutoff, "epsilon": self.epsilon,
                "allow_shared_points": self.allow_shared_points,
                "prune_zero_weight": self.prune_zero_weight,
                "potentials": self.table.to_mapping()}


@dataclass(frozen=True)
class Vertex:
    ligand_point_id: str
    receptor_point_id: str
    weight: float
    ligand_family: str = ""
    receptor_family: str = ""


def select_receptor_scope(points: Sequence[PharmacophorePoint], ligand_coords,
                          cutoff: float = 6.5) -> list[PharmacophorePoint]:
    """Receptor points within ``cutoff`` of at least one ligand atom."""
    lig = np.asarray(ligand_coords, dtype=np.float64).reshape(-1, 3)
    if len(lig) == 0:
        raise InputError("ligand pose has no atoms")
    if not points:
        return []
    pc = np.array([p.coords for p in points])
    nearest = np.sqrt(((pc[:, None, :] - lig[None, :, :]) ** 2).sum(-1)).min(axis=1)
    return [p for p, d in zip(points, nearest) if d <= cutoff]


def build_vertices(ligand_points: Sequence[PharmacophorePoint],
                   receptor_points: Sequence[PharmacophorePoint],
                   table: PotentialTable | None = None) -> list[Vertex]:
    """All ligand x receptor pairings, ligand-major order."""
    if not ligand_points or not receptor_points:
        raise InputError("both ligand and receptor point sets must be non-empty")
    table = table or PotentialTable.default()
    return [
        Vertex(l.id, p.id, table(l.family, p.family), l.family, p.family)
        for l in ligand_points for p in receptor_points
    ]


def _distance_matrix(x: np.ndarray) -> np.ndarray:
    diff = x[..., :, None, :] - x[..., None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def build_edges(vertices: Sequence[Vertex], ensemble: ConformerEnsemble,
                receptor_coords: dict[str, Sequence[float]], epsilon: float = 1.0,
                allow_shared_points: bool = False) -> np.ndarray:
    """BIG adjacency: pairings are compatible when some conformer keeps the
    ligand-side distance within ``2 * epsilon`` of the receptor-side distance.

    Pairings that share a ligand or a receptor point are never joined unless
    ``allow_shared_points`` is set.
    """
    lig_ids = sorted({v.ligand_point_id for v in vertices}, key=ensemble.point_index)
    rec_ids = list(dict.fromkeys(v.receptor_point_id for v in vertices))
    try:
        rc = np.array([receptor_coords[r] for r in rec_ids], dtype=np.float64).reshape(-1, 3)
    except KeyError as exc:
        raise InputError(f"receptor point {exc.args[0]!r} has no coordinates") from None
    lc = ensemble.coords_of(lig_ids)  # (M, L, 3)
    d_lig = _distance_matrix(lc)  # (M, L, L)
    d_rec = _distance_matrix(rc)  # (P, P)
    tol = 2.0 * epsilon

    # compat[a, b, p, q]: ligand pair (a, b) fits receptor pair (p, q) in some conformer
    n_l, n_p = len(lig_ids), len(rec_ids)
    compat = np.zeros((n_l, n_l, n_p, n_p), dtype=bool)
    for k in range(d_lig.shape[0]):
        compat |= np.abs(d_lig[k][:, :, None, None] - d_rec[None, None, :, :]) <= tol

    li = np.array([lig_ids.index(v.ligand_point_id) for v in vertices])
    pi = np.array([rec_ids.index(v.receptor_point_id) for v in vertices])
    adj = compat[li[:, None], li[None, :], pi[:, None], pi[None, :]]
    if not allow_shared_points:
        adj &= li[:, None] != li[None, :]
        adj &= pi[:, None] != pi[None, :]
    np.fill_diagonal(adj, False)
    return adj


def build_big(ligand_points: Sequence[PharmacophorePoint],
              receptor_points: Sequence[PharmacophorePoint],
              ensemble: ConformerEnsemble, cfg: BigConfig | None = None) -> InteractionGraph:
    """Vertices, weights and compatibility edges of the interaction graph."""
    cfg = cfg or BigConfig()
    vertices = build_vertices(ligand_points, receptor_points, cfg.table)
    if cfg.prune_zero_weight:
        vertices = [v for v in vertices if v.weight > 0]
    rcoords = {p.id: p.coords for p in receptor_points}
    adj = build_edges(vertices, ensemble, rcoords, cfg.epsilon, cfg.allow_shared_points)
    return InteractionGraph(
        [v.weight for v in vertices], adj, kind="BIG",
        labels=[(v.ligand_point_id, v.receptor_point_id) for v in vertices],
        metadata={"construction": cfg.record(), "n_ligand_points": len(ligand_points),
                  "n_receptor_points": len(receptor_points),
                  "n_conformers": ensemble.conformer_count,
                  "chimeric_filter": "not applied"},
    )


def complement(g: InteractionGraph) -> InteractionGraph:
    """Same vertices and weights, every unordered vertex pair's adjacency inverted."""
    return g.complement()
