"""Deterministic synthetic docking instances.

The ligand is a self-avoiding chain of heavy atoms; conformers come from
random torsions about chain bonds followed by a random rigid motion. The
receptor is a lattice of atoms filling a shell around the crystal pose, so
the cavity lining is solvent exposed and deeper layers are buried.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .io import FAMILIES, Atom, ConformerEnsemble, PharmacophorePoint, BONDI_RADII
from .sasa import SasaConfig, shrake_rupley

_FAMILY_P = np.array([0.08, 0.08, 0.2, 0.24, 0.28, 0.12])


@dataclass
class SyntheticInstance:
    ligand_points: list[PharmacophorePoint]
    receptor_points: list[PharmacophorePoint]
    receptor_atoms: list[Atom]
    ensemble: ConformerEnsemble
    crystal_atoms: np.ndarray  # (n_atoms, 3) reference pose
    ligand_serials: list[int]
    ligand_elements: list[str]


def _chain(rng, n_atoms: int, bond: float = 1.5) -> np.ndarray:
    pts = [np.zeros(3)]
    direction = np.array([1.0, 0.0, 0.0])
    while len(pts) < n_atoms:
        step = direction + 0.8 * rng.normal(size=3)
        step = bond * step / np.linalg.norm(step)
        cand = pts[-1] + step
        if min(np.linalg.norm(cand - p) for p in pts[:-1] or [cand + 10]) > 2.2:
            pts.append(cand)
            direction = 0.7 * direction + 0.3 * step / bond
    x = np.array(pts)
    return x - x.mean(axis=0)


def _torsion_conformer(rng, base: np.ndarray, n_torsions: int, spread_deg: float) -> np.ndarray:
    n = len(base)
    for _ in range(100):
        x = base.copy()
        for b in rng.choice(np.arange(1, n - 2), size=n_torsions, replace=False):
            axis = x[b + 1] - x[b]
            rot = Rotation.from_rotvec(axis / np.linalg.norm(axis) * np.deg2rad(rng.normal(0, spread_deg)))
            x[b + 2:] = rot.apply(x[b + 2:] - x[b + 1]) + x[b + 1]
        d = np.linalg.norm(x[:, None] - x[None, :], axis=-1) + 10 * np.eye(n)
        if d.min() > 1.25:
            return x
    return base.copy()


def make_synthetic_instance(seed: int = 0, n_ligand_atoms: int = 24, n_ligand_points: int = 15,
                            n_exposed: int = 36, n_buried: int = 5, n_far: int = 8,
                            n_conformers: int = 10, cutoff: float = 6.5,
                            grid: float = 1.9) -> SyntheticInstance:
    rng = np.random.default_rng(seed)
    crystal = _chain(rng, n_ligand_atoms)
    serials = list(range(1, n_ligand_atoms + 1))
    elements = [str(e) for e in rng.choice(["C", "C", "C", "N", "O"], size=n_ligand_atoms)]
    point_atoms = np.sort(rng.choice(n_ligand_atoms, size=n_ligand_points, replace=False))
    lig_fam = rng.choice(FAMILIES, size=n_ligand_points, p=_FAMILY_P)
    lig_ids = [f"lig_{lig_fam[i]}_{i}" for i in range(n_ligand_points)]
    ligand_points = [PharmacophorePoint(lig_ids[i], str(lig_fam[i]), tuple(crystal[a]), "ligand")
                     for i, a in enumerate(point_atoms)]

    confs = []
    for _ in range(n_conformers):
        x = _torsion_conformer(rng, crystal, 6, 50.0)
        rot = Rotation.random(random_state=rng)
        confs.append(rot.apply(x) + rng.uniform(-20, 20, size=3))
    confs = np.array(confs)
    ensemble = ConformerEnsemble(lig_ids, serials, confs[:, point_atoms, :], confs,
                                 dict(zip(serials, elements)))

    # receptor: lattice sites at 4.5-10 A from the crystal pose
    lo, hi = crystal.min(axis=0) - 10.5, crystal.max(axis=0) + 10.5
    axes = [np.arange(a, b, grid) for a, b in zip(lo, hi)]
    sites = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    sites += rng.normal(scale=0.15, size=sites.shape)
    dmin = np.sqrt(((sites[:, None, :] - crystal[None, :, :]) ** 2).sum(-1)).min(axis=1)
    keep = (dmin >= 4.5) & (dmin <= 10.0)
    sites, dmin = sites[keep], dmin[keep]
    rec_el = rng.choice(["C", "C", "N", "O", "S"], size=len(sites), p=[0.3, 0.3, 0.18, 0.18, 0.04])
    atoms = [Atom(i + 1, str(e), tuple(map(float, c)), BONDI_RADII[str(e)])
             for i, (e, c) in enumerate(zip(rec_el, sites))]
    sasa = shrake_rupley(atoms, SasaConfig(sphere_points=240))
    area = np.array([sasa[a.serial] for a in atoms])

    exposed = np.flatnonzero((dmin <= cutoff - 0.3) & (area > 3.0))
    buried = np.flatnonzero((dmin <= cutoff - 0.3) & (area == 0.0))
    far = np.flatnonzero(dmin > cutoff + 0.5)
    if len(exposed) < n_exposed or len(buried) < n_buried or len(far) < n_far:
        raise RuntimeError("synthetic receptor too small for the requested point counts")
    picks = ([("x", int(i)) for i in rng.choice(exposed, n_exposed, replace=False)]
             + [("b", int(i)) for i in rng.choice(buried, n_buried, replace=False)]
             + [("f", int(i)) for i in rng.choice(far, n_far, replace=False)])
    picks.sort(key=lambda t: t[1])
    rec_fam = rng.choice(FAMILIES, size=len(picks), p=_FAMILY_P)
    receptor_points = [
        PharmacophorePoint(f"rec_{fam}_{j}", str(fam), atoms[i].coords, "receptor", atoms[i].serial)
        for j, ((_, i), fam) in enumerate(zip(picks, rec_fam))
    ]
    return SyntheticInstance(ligand_points, receptor_points, atoms, ensemble, crystal,
                             serials, elements)


def make_toy_instance() -> SyntheticInstance:
    """Three ligand points, four receptor points, two conformers.

    Conformer 0 is the reference pose; receptor points P0-P2 sit 4 A above
    ligand points L0-L2 so that contact set is exactly consistent with it.
    """
    lig = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [0.0, 6.0, 0.0]])
    extra = np.array([[2.0, 2.0, 0.0]])
    conf0 = np.vstack([lig, extra])
    conf1 = conf0.copy()
    conf1[2] = [0.0, 3.0, 0.0]
    serials = [1, 2, 3, 4]
    elements = ["N", "O", "C", "C"]
    ids = ["L0", "L1", "L2"]
    ligand_points = [PharmacophorePoint(i, f, tuple(c), "ligand")
                     for i, f, c in zip(ids, ["D", "A", "H"], lig)]
    rec = np.vstack([lig + [0.0, 0.0, 4.0], [[2.0, 2.0, -4.5]]])
    atoms = [Atom(100 + j, e, tuple(c), BONDI_RADII[e]) for j, (e, c) in enumerate(zip("ONCC", rec))]
    receptor_points = [PharmacophorePoint(f"P{j}", f, tuple(c), "receptor", 100 + j)
                       for j, (f, c) in enumerate(zip(["A", "D", "H", "AR"], rec))]
    ensemble = ConformerEnsemble(ids, serials, np.stack([lig, conf1[:3]]), np.stack([conf0, conf1]),
                                 dict(zip(serials, elements)))
    return SyntheticInstance(ligand_points, receptor_points, atoms, ensemble, conf0 + [0.0, 0.0, 4.0],
                             serials, elements)


def write_instance_files(inst: SyntheticInstance, directory) -> dict:
    """Write all inputs of ``inst`` under ``directory``; returns the run-config paths."""
    from pathlib import Path

    from .io import format_atom_records, points_to_json

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {
        "receptor_atoms": d / "receptor.pdb", "receptor_points": d / "receptor_points.json",
        "ligand_points": d / "ligand_points.json", "ensemble": d / "ensemble.json",
        "reference": d / "reference.pdb",
    }
    paths["receptor_atoms"].write_text(format_atom_records(
        [a.serial for a in inst.receptor_atoms], [a.element for a in inst.receptor_atoms],
        [a.coords for a in inst.receptor_atoms], resname="REC"))
    paths["receptor_points"].write_text(points_to_json(inst.receptor_points))
    paths["ligand_points"].write_text(points_to_json(inst.ligand_points))
    paths["ensemble"].write_text(inst.ensemble.to_json())
    paths["reference"].write_text(format_atom_records(inst.ligand_serials, inst.ligand_elements,
                                                      inst.crystal_atoms))
    return {k: str(v) for k, v in paths.items()}
