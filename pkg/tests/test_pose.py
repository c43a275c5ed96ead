import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from qdock.io import ConformerEnsemble, InputError
from qdock.pose import ContactSet, kabsch, reconstruct, rmsd


def _points(seed, n=8):
    return np.random.default_rng(seed).normal(scale=3.0, size=(n, 3))


def _residual(R, t, a, b):
    return float((((a @ R.T + t) - b) ** 2).sum())


def test_identity():
    a = _points(0)
    f = kabsch(a, a)
    assert np.allclose(f.rotation, np.eye(3), atol=1e-12)
    assert np.allclose(f.translation, 0, atol=1e-12)
    assert f.residual == pytest.approx(0, abs=1e-20)


@pytest.mark.parametrize("seed", range(10))
def test_rotation_round_trip(seed):
    rng = np.random.default_rng(seed)
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    Q = Rotation.from_rotvec(axis * rng.uniform(0, np.pi)).as_matrix()
    t = rng.uniform(-10, 10, 3)
    a = _points(seed + 100)
    f = kabsch(a, a @ Q.T + t)
    assert np.abs(f.rotation - Q).max() < 1e-9
    assert np.abs(f.translation - t).max() < 1e-9
    assert f.residual < 1e-18
    R = f.rotation
    assert np.abs(R.T @ R - np.eye(3)).max() < 1e-9
    assert abs(np.linalg.det(R) - 1) < 1e-9


def test_mirror_image_gives_proper_rotation():
    a = _points(3, 6)
    b = a * np.array([-1.0, 1.0, 1.0])
    f = kabsch(a, b)
    assert np.linalg.det(f.rotation) == pytest.approx(1.0, abs=1e-9)
    assert f.residual > 0
    # brute-force oracle: no proper rotation does better (with centroids aligned)
    ca, cb = a.mean(0), b.mean(0)
    grid = Rotation.random(20000, random_state=0).as_matrix()
    A, B = a - ca, b - cb
    best = min(float(((A @ R.T - B) ** 2).sum()) for R in grid)
    assert f.residual <= best + 1e-9
    assert best - f.residual < 0.05 * f.residual + 0.5


def test_underdetermined_flags():
    a = _points(1, 3)
    assert kabsch(a[:1], a[:1] + 1.0).underdetermined
    f = kabsch(a[:1], a[:1] + [1.0, 2.0, 3.0])
    assert np.allclose(f.apply(a[:1]), a[:1] + [1.0, 2.0, 3.0])
    assert kabsch(a[:2], a[:2]).underdetermined
    line = np.outer(np.arange(4.0), [1.0, 2.0, 0.5])
    assert kabsch(line, line + 1).underdetermined
    assert not kabsch(a, a).underdetermined


def test_bad_shapes():
    with pytest.raises(ValueError):
        kabsch(np.zeros((3, 3)), np.zeros((4, 3)))
    with pytest.raises(ValueError):
        kabsch(np.zeros((0, 3)), np.zeros((0, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31))
def test_optimal_vs_identity_and_motion_invariant(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(6, 3)) * 3
    b = rng.normal(size=(6, 3)) * 3
    f = kabsch(a, b)
    assert f.residual <= _residual(np.eye(3), np.zeros(3), a, b) + 1e-9
    M = Rotation.random(random_state=rng).as_matrix()
    s = rng.uniform(-5, 5, 3)
    g = kabsch(a @ M.T + s, b @ M.T + s)
    assert g.residual == pytest.approx(f.residual, abs=1e-9)


def test_weighted_fit():
    a = _points(4, 5)
    b = a + np.random.default_rng(1).normal(scale=0.3, size=a.shape)
    plain = kabsch(a, b)
    heavy = kabsch(a, b, weights=[10, 1, 1, 1, 1])
    assert np.linalg.norm(heavy.apply(a[:1]) - b[:1]) < np.linalg.norm(plain.apply(a[:1]) - b[:1])


def test_rmsd():
    a = _points(5, 10)
    assert rmsd(a, a) == 0.0
    assert abs(rmsd(a, a + [1.0, 0, 0]) - 1.0) < 1e-9
    b = _points(6, 10)
    assert rmsd(a, b) == rmsd(b, a) > 0
    with pytest.raises(ValueError):
        rmsd(a, a[:3])


def _ensemble(confs, atoms=None):
    pc = np.asarray(confs, dtype=float)
    atoms = pc if atoms is None else np.asarray(atoms, dtype=float)
    ids = [f"l{i}" for i in range(pc.shape[1])]
    return ConformerEnsemble(ids, list(range(1, atoms.shape[1] + 1)), pc, atoms)


def test_reconstruct_single_conformer_exact():
    lig = _points(7, 4)
    Q = Rotation.from_rotvec([0.2, 0.5, -0.3]).as_matrix()
    rec = lig @ Q.T + [5, 0, 1]
    ens = _ensemble([lig])
    cs = ContactSet([f"l{i}" for i in range(4)], [f"p{i}" for i in range(4)], rec)
    pose = reconstruct(cs, ens)
    assert pose.conformer == 0
    assert pose.transform.residual < 1e-18
    assert np.allclose(pose.coords, rec, atol=1e-9)
    assert pose.coords.shape == ens.atom_coords[0].shape


def test_reconstruct_picks_fitting_conformer():
    lig = _points(8, 4)
    bent = lig.copy()
    bent[3] += [2.0, -1.0, 0.5]
    rec = lig + [0, 0, 3]
    ens = _ensemble([bent, lig])
    cs = ContactSet([f"l{i}" for i in range(4)], [f"p{i}" for i in range(4)], rec)
    pose = reconstruct(cs, ens)
    assert pose.conformer == 1
    assert pose.residuals[0] > pose.residuals[1]


def test_reconstruct_ties_to_lower_index():
    lig = _points(9, 4)
    ens = _ensemble([lig, lig + 1.0])
    cs = ContactSet([f"l{i}" for i in range(4)], ["p"] * 4, lig)
    assert reconstruct(cs, ens).conformer == 0


def test_chimeric_contacts_leave_residual():
    c0 = _points(10, 4)
    c1 = c0.copy()
    c1[2:] += [3.0, 0.0, 0.0]
    # contacts 0,1 from conformer 0, contacts 2,3 from conformer 1 shifted differently
    rec = np.vstack([c0[:2], c1[2:] + [0, 2.5, 0]])
    ens = _ensemble([c0, c1])
    cs = ContactSet([f"l{i}" for i in range(4)], [f"p{i}" for i in range(4)], rec)
    pose = reconstruct(cs, ens)
    assert min(pose.residuals) > 1e-3
    assert pose.transform.residual == min(pose.residuals)


def test_reconstruct_with_reference_rmsd():
    lig = _points(11, 5)
    rec = lig + [1.0, 2.0, 3.0]
    elements = {1: "C", 2: "H", 3: "C", 4: "O", 5: "H"}
    ens = ConformerEnsemble([f"l{i}" for i in range(5)], [1, 2, 3, 4, 5], [lig], [lig], elements)
    cs = ContactSet([f"l{i}" for i in range(5)], ["p"] * 5, rec)
    ref = rec.copy()
    ref[1] += 5.0  # hydrogen displaced; heavy-atom RMSD ignores it
    pose = reconstruct(cs, ens, reference=ref)
    assert pose.rmsd_vs_reference == pytest.approx(0.0, abs=1e-9)


def test_contact_set_validation():
    with pytest.raises(InputError):
        ContactSet([], [], np.zeros((0, 3)))
    with pytest.raises(InputError):
        ContactSet(["a"], ["b", "c"], np.zeros((1, 3)))
    with pytest.raises(InputError):
        ContactSet.from_labels([("a", "missing")], {})
