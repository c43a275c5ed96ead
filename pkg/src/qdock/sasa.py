"""Shrake-Rupley solvent accessible surface area and the buried-point filter."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .io import Atom, InputError, PharmacophorePoint


@dataclass(frozen=True)
class SasaConfig:
    probe_radius: float = 1.4
    sphere_points: int = 960
    threshold: float = 1.0

    def __post_init__(self):
        if self.probe_radius < 0:
            raise ValueError("probe_radius must be >= 0")
        if self.sphere_points < 12:
            raise ValueError("sphere_points must be >= 12")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors on a golden-angle spiral."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rho = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - math.sqrt(5.0)) * k
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _neighbor_lists(coords: np.ndarray, radii: np.ndarray):
    """CSR neighbour lists of overlapping expanded spheres via a uniform cell grid.

    Cell edge is the largest expanded radius, so any overlapping pair lies
    within two cells along each axis.
    """
    n = len(coords)
    cell = float(radii.max()) if n else 1.0
    keys = np.floor(coords / cell).astype(np.int64)
    grid: dict[tuple, list[int]] = defaultdict(list)
    for i, key in enumerate(map(tuple, keys)):
        grid[key].append(i)
    offsets = [(dx, dy, dz) for dx in range(-2, 3) for dy in range(-2, 3) for dz in range(-2, 3)]
    indptr = np.zeros(n + 1, dtype=np.int64)
    chunks = []
    for i in range(n):
        kx, ky, kz = keys[i]
        cand = []
        for dx, dy, dz in offsets:
            cand.extend(grid.get((kx + dx, ky + dy, kz + dz), ()))
        cand = np.array(sorted(cand), dtype=np.int64)
        cand = cand[cand != i]
        if len(cand):
            d = np.linalg.norm(coords[cand] - coords[i], axis=1)
            cand = cand[d < radii[cand] + radii[i]]
        chunks.append(cand)
        indptr[i + 1] = indptr[i] + len(cand)
    indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return indptr, indices.astype(np.int64)


def shrake_rupley(atoms: Sequence[Atom], cfg: SasaConfig = SasaConfig()) -> dict[int, float]:
    """Per-atom SASA in square angstrom, keyed by atom serial.

    Each atom's expanded sphere (vdW radius plus probe) carries
    ``cfg.sphere_points`` test points; the exposed fraction scales its area.
    """
    if not atoms:
        return {}
    coords = np.array([a.coords for a in atoms], dtype=np.float64)
    radii = np.array([a.vdw_radius for a in atoms], dtype=np.float64) + cfg.probe_radius
    sphere = fibonacci_sphere(cfg.sphere_points)
    indptr, indices = _neighbor_lists(coords, radii)
    exposed = kernels.exposed_counts(coords, radii, sphere, indptr, indices)
    area = 4.0 * np.pi * radii ** 2 * (np.asarray(exposed) / cfg.sphere_points)
    return {a.serial: float(s) for a, s in zip(atoms, area)}


def filter_points(points: Sequence[PharmacophorePoint], sasa: Mapping[int, float],
                  threshold: float = 1.0):
    """Split receptor points into (kept, removed) by parent-atom SASA > ``threshold``."""
    kept, removed = [], []
    for p in points:
        if p.parent_atom_serial is None or p.parent_atom_serial not in sasa:
            raise InputError(f"point {p.id!r}: parent atom {p.parent_atom_serial} has no SASA value")
        (kept if sasa[p.parent_atom_serial] > threshold else removed).append(p)
    return kept, removed
