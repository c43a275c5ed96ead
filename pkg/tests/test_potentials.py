import numpy as np
import pytest

from qdock.io import FAMILIES
from qdock.potentials import PotentialTable, potential_lookup


def test_table_symmetric_and_nonnegative():
    m = PotentialTable.default().matrix
    assert m.shape == (6, 6)
    assert np.array_equal(m, m.T)
    assert (m >= 0).all()


@pytest.mark.parametrize("f1,f2,value", [
    ("D", "NI", 0.7114), ("NI", "AR", 0.0), ("H", "H", 0.0504), ("A", "D", 0.6686),
    ("PI", "A", 0.7029), ("AR", "AR", 0.1943), ("NI", "NI", 0.2953),
])
def test_table_values(f1, f2, value):
    t = PotentialTable.default()
    assert t(f1, f2) == value
    assert t(f2, f1) == value
    assert potential_lookup(t, f1, f2) == value


def test_table_is_read_only():
    t = PotentialTable.default()
    with pytest.raises(ValueError):
        t.matrix[0, 0] = 1.0


def test_unknown_family():
    with pytest.raises((KeyError, ValueError)):
        PotentialTable.default()("D", "XX")


def test_mapping_round_trip():
    t = PotentialTable.default()
    back = PotentialTable.from_mapping(t.to_mapping())
    assert np.array_equal(back.matrix, t.matrix)
    # one triangle is enough, the mirror entry fills in
    half = {f1: {f2: float(t(f1, f2)) for f2 in FAMILIES[i:]} for i, f1 in enumerate(FAMILIES)}
    assert np.array_equal(PotentialTable.from_mapping(half).matrix, t.matrix)


def test_rejects_asymmetric():
    m = np.array(PotentialTable.default().matrix)
    m[0, 1] += 0.1
    with pytest.raises(ValueError):
        PotentialTable(m)
