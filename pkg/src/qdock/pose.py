"""Rigid-body pose reconstruction from a contact set."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .io import ConformerEnsemble, InputError


@dataclass
class PoseTransform:
    rotation: np.ndarray
    translation: np.ndarray
    residual: float
    conformer: int | None = None
    underdetermined: bool = False

    def apply(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=np.float64) @ self.rotation.T + self.translation


def kabsch(a, b, weights=None) -> PoseTransform:
    """Proper rotation R and translation t minimising sum ||R a_i + t - b_i||^2.

    Optional per-point ``weights`` give the weighted least-squares fit.
    Fewer than three points, or collinear ones, still return a transform but
    with ``underdetermined`` set.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 3)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 3)
    if a.shape != b.shape:
        raise ValueError("point sets must have the same shape")
    if len(a) == 0:
        raise ValueError("need at least one point pair")
    w = np.ones(len(a)) if weights is None else np.asarray(weights, dtype=np.float64)
    w = w / w.sum()
    ca, cb = w @ a, w @ b
    A, B = a - ca, b - cb
    H = (A * w[:, None]).T @ B
    U, S, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    D = np.diag([1.0, 1.0, d if d != 0 else 1.0])
    R = Vt.T @ D @ U.T
    t = cb - R @ ca
    resid = float((((a @ R.T + t) - b) ** 2).sum(axis=1) @ (w * len(a)))
    sv = np.linalg.svd(A, compute_uv=False) if len(a) > 1 else np.zeros(3)
    under = len(a) < 3 or sv[1] <= 1e-8 * max(sv[0], 1e-300)
    return PoseTransform(R, t, resid, underdetermined=bool(under))


def rmsd(a, b) -> float:
    """Root mean square deviation without re-superposition."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 3)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 3)
    if a.shape != b.shape:
        raise ValueError(f"atom counts differ: {len(a)} vs {len(b)}")
    return float(np.sqrt(((a - b) ** 2).sum(axis=1).mean()))


@dataclass
class ContactSet:
    ligand_ids: list[str]
    receptor_ids: list[str]
    receptor_coords: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.receptor_coords = np.asarray(self.receptor_coords, dtype=np.float64).reshape(-1, 3)
        if not self.ligand_ids:
            raise InputError("contact set is empty")
        if not (len(self.ligand_ids) == len(self.receptor_ids) == len(self.receptor_coords)):
            raise InputError("contact set fields have inconsistent lengths")

    @classmethod
    def from_labels(cls, labels: Sequence[tuple[str, str]], receptor_coords: dict,
                    weights=None) -> ContactSet:
        try:
            coords = [receptor_coords[p] for _, p in labels]
        except KeyError as exc:
            raise InputError(f"receptor point {exc.args[0]!r} has no coordinates") from None
        return cls([l for l, _ in labels], [p for _, p in labels], coords, weights)


@dataclass
class DockedPose:
    conformer: int
    transform: PoseTransform
    atom_serials: list[int]
    coords: np.ndarray
    residuals: list[float] = field(default_factory=list)
    rmsd_vs_reference: float | None = None

    def report(self) -> dict:
        return {"conformer": self.conformer, "residual": self.transform.residual,
                "residuals": self.residuals, "rmsd": self.rmsd_vs_reference,
                "underdetermined": self.transform.underdetermined,
                "rotation": self.transform.rotation.tolist(),
                "translation": self.transform.translation.tolist()}


def reconstruct(contacts: ContactSet, ensemble: ConformerEnsemble, reference=None,
                weighted: bool = False) -> DockedPose:
    """Fit every conformer's contact points onto the receptor points and keep
    the lowest residual (lowest index on ties); the winning transform places
    all of that conformer's atoms.

    ``reference`` (atom coordinates in ensemble order) adds a heavy-atom RMSD.
    """
    if ensemble.conformer_count < 1:
        raise InputError("conformer ensemble is empty")
    lig = ensemble.coords_of(contacts.ligand_ids)
    w = contacts.weights if weighted else None
    fits = [kabsch(lig[k], contacts.receptor_coords, w) for k in range(ensemble.conformer_count)]
    residuals = [f.residual for f in fits]
    best = int(np.argmin(residuals))
    fit = fits[best]
    fit.conformer = best
    coords = fit.apply(ensemble.atom_coords[best])
    pose = DockedPose(best, fit, list(ensemble.atom_serials), coords, residuals)
    if reference is not None:
        mask = ensemble.heavy_atom_mask()
        pose.rmsd_vs_reference = rmsd(coords[mask], np.asarray(reference, dtype=np.float64)[mask])
    return pose
