"""Knowledge-based pair potentials between pharmacophore families."""
from __future__ import annotations

import numpy as np

from .io import FAMILIES

# rows/columns follow FAMILIES: NI, PI, D, A, H, AR
_DEFAULT = np.array([
    [0.2953, 0.6459, 0.7114, 0.6450, 0.1802, 0.0000],
    [0.6459, 0.1596, 0.4781, 0.7029, 0.0679, 0.1555],
    [0.7114, 0.4781, 0.5244, 0.6686, 0.1453, 0.1091],
    [0.6450, 0.7029, 0.6686, 0.5478, 0.2317, 0.0770],
    [0.1802, 0.0679, 0.1453, 0.2317, 0.0504, 0.0795],
    [0.0000, 0.1555, 0.1091, 0.0770, 0.0795, 0.1943],
])
_DEFAULT.setflags(write=False)


class PotentialTable:
    """Symmetric 6x6 family-pair score matrix."""

    def __init__(self, matrix=None):
        m = _DEFAULT if matrix is None else np.array(matrix, dtype=np.float64)
        if m.shape != (6, 6):
            raise ValueError("potential table must be 6x6")
        if not np.array_equal(m, m.T):
            raise ValueError("potential table must be symmetric")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("potential scores must be finite and non-negative")
        self.matrix = m.copy()
        self.matrix.setflags(write=False)
        self._index = {f: i for i, f in enumerate(FAMILIES)}

    @classmethod
    def default(cls) -> PotentialTable:
        return cls()

    @classmethod
    def from_mapping(cls, data: dict) -> PotentialTable:
        """Build from ``{"NI": {"NI": 0.29, ...}, ...}``; missing pairs fall back to the mirror entry."""
        m = np.full((6, 6), np.nan)
        for f1, row in data.items():
            for f2, value in row.items():
                i, j = FAMILIES.index(f1), FAMILIES.index(f2)
                m[i, j] = value
        m = np.where(np.isnan(m), m.T, m)
        if np.isnan(m).any():
            raise ValueError("potential table mapping is incomplete")
        return cls(m)

    def __call__(self, f1: str, f2: str) -> float:
        try:
            return float(self.matrix[self._index[f1], self._index[f2]])
        except KeyError as exc:
            raise ValueError(f"unknown pharmacophore family {exc.args[0]!r}") from None

    def to_mapping(self) -> dict:
        return {f1: {f2: float(self.matrix[i, j]) for j, f2 in enumerate(FAMILIES)}
                for i, f1 in enumerate(FAMILIES)}


def potential_lookup(table: PotentialTable, f1: str, f2: str) -> float:
    return table(f1, f2)
