import json
import math

import numpy as np
import pytest

from qdock.graph import InteractionGraph, random_graph
from qdock.lattice import Embedding, EmbeddingConfigError, gls_map, make_lattice, sample_subgraphs


def _pair_distances(pos):
    d = np.linalg.norm(pos[:, None] - pos[None], axis=-1)
    return d[np.triu_indices(len(pos), 1)]


def test_triangular_geometry():
    lat = make_lattice("triangular", 5.0, 3)
    assert len(lat) == 9
    d = np.unique(np.round(_pair_distances(lat.positions), 9))
    assert d[0] == pytest.approx(5.0)
    assert d[1] == pytest.approx(5 * math.sqrt(3))
    assert lat.next_nearest_distance == pytest.approx(5 * math.sqrt(3))


def test_square_geometry():
    lat = make_lattice("square", 5.0, 2)
    d = np.unique(np.round(_pair_distances(lat.positions), 9))
    assert d.tolist() == pytest.approx([5.0, 5 * math.sqrt(2)])


def test_single_trap_and_min_spacing():
    assert len(make_lattice("triangular", 7.0, 1)) == 1
    lat = make_lattice("triangular", 7.0, 6, 5)
    assert _pair_distances(lat.positions).min() >= 7.0 - 1e-12
    with pytest.raises(ValueError):
        lat.positions[0, 0] = 1.0


def test_lattice_errors():
    with pytest.raises(ValueError):
        make_lattice("hex", 5.0, 2)
    with pytest.raises(ValueError):
        make_lattice("square", 0.0, 2)
    with pytest.raises(ValueError):
        make_lattice("square", 5.0, 0)


@pytest.mark.parametrize("rb", [7.0, 12.2, 3.0])
def test_blockade_window(rb):
    lat = make_lattice()
    g = InteractionGraph.from_edges(1, [])
    with pytest.raises(EmbeddingConfigError):
        gls_map(g, lat, rb)


def test_neighbor_table_degree():
    lat = make_lattice("triangular", 7.0, 5)
    near = lat.neighbor_table(8.4)
    assert len(near[12]) == 6  # interior site
    assert max(len(n) for n in make_lattice("square", 7.0, 5).neighbor_table(8.4)) == 4


def test_single_vertex():
    emb = gls_map(InteractionGraph.from_edges(1, []), make_lattice(), seed=3)
    assert emb.vertices == [0] and len(emb.traps) == 1


def test_triangle_fully_placed():
    tri = InteractionGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    for seed in range(10):
        emb = gls_map(tri, make_lattice(), seed=seed)
        assert sorted(emb.vertices) == [0, 1, 2]
        assert np.array_equal(emb.unit_disk_adjacency(), ~np.eye(3, dtype=bool))


def test_star_loses_a_leaf():
    star = InteractionGraph.from_edges(8, [(0, i) for i in range(1, 8)], [1.0] + [0.5] * 7)
    for seed in range(20):
        emb = gls_map(star, make_lattice(), seed=seed)
        assert len(emb) <= 7
        assert len(emb) + len(emb.discarded) <= 8


def _assert_consistent(g, emb):
    idx = np.array(emb.vertices)
    assert len(set(emb.vertices)) == len(emb.vertices)
    assert len(set(emb.traps)) == len(emb.traps)
    assert np.array_equal(emb.unit_disk_adjacency(), g.adjacency[np.ix_(idx, idx)])


@pytest.mark.parametrize("seed", range(60))
def test_random_graph_embeddings_are_induced_unit_disk(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(1, 60)), float(rng.uniform(0.05, 0.9)), rng)
    geometry = "square" if seed % 3 == 0 else "triangular"
    emb = gls_map(g, make_lattice(geometry, 6.0, 7), seed=seed, max_atoms=None if seed % 2 else 9)
    _assert_consistent(g, emb)
    assert len(emb) >= 1
    if seed % 2 == 0:
        assert len(emb) <= 9


def test_determinism_and_seed_variety(rng):
    g = random_graph(40, 0.3, rng)
    lat = make_lattice()
    a = gls_map(g, lat, seed=5)
    b = gls_map(g, lat, seed=5)
    assert a.vertices == b.vertices and a.traps == b.traps
    starts = {gls_map(g, lat, seed=s).traps[0] for s in range(10)}
    assert len(starts) > 1


def test_sample_subgraphs(rng):
    g = random_graph(30, 0.4, rng)
    lat = make_lattice()
    one = sample_subgraphs(g, lat, None, 1, [7])
    assert len(one) == 1
    many = sample_subgraphs(g, lat, None, 3, [1, 2, 3])
    again = sample_subgraphs(g, lat, None, 3, [1, 2, 3])
    assert [e.vertices for e in many] == [e.vertices for e in again]
    with pytest.raises(ValueError):
        sample_subgraphs(g, lat, None, 0, [])


def test_embedding_json_round_trip(rng):
    g = random_graph(20, 0.3, rng)
    emb = gls_map(g, make_lattice(), seed=2)
    doc = json.loads(emb.to_json())
    assert set(doc) == {"trap_coords", "vertex_map", "vertices", "R_b"}
    back = Embedding.from_dict(doc)
    assert back.vertices == emb.vertices and back.traps == emb.traps
    assert np.array_equal(back.positions, emb.positions)
