import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdock.graph import InteractionGraph, bits_to_list, random_graph


def test_validation():
    with pytest.raises(ValueError, match="self-loops"):
        InteractionGraph([1.0], [[True]])
    with pytest.raises(ValueError, match="symmetric"):
        InteractionGraph([1.0, 1.0], [[False, True], [False, False]])
    with pytest.raises(ValueError, match="kind"):
        InteractionGraph([1.0], [[False]], kind="other")
    with pytest.raises(ValueError):
        InteractionGraph.from_edges(2, [(1, 1)])


def test_basic_queries():
    g = InteractionGraph.from_edges(4, [(0, 1), (1, 2)], [0.1, 0.2, 0.3, 0.4])
    assert g.n == 4 and g.edge_count == 2
    assert g.edges() == [(0, 1), (1, 2)]
    assert g.neighbors(1).tolist() == [0, 2]
    assert g.degrees().tolist() == [1, 2, 1, 0]
    assert bits_to_list(g.bitsets()[1]) == [0, 2]
    assert g.weight_of([0, 3]) == pytest.approx(0.5)
    sub = g.subgraph([1, 2, 3])
    assert sub.edges() == [(0, 1)] and sub.weights.tolist() == [0.2, 0.3, 0.4]


@pytest.mark.parametrize("seed", range(200))
def test_complement_involution(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(0, 40)), float(rng.uniform(0, 1)), rng)
    c = g.complement()
    n = g.n
    assert c.edge_count == n * (n - 1) // 2 - g.edge_count
    assert not (c.adjacency & g.adjacency).any()
    assert c.complement() == g


@settings(max_examples=50)
@given(st.integers(0, 2**40))
def test_bits_to_list(mask):
    assert bits_to_list(mask) == [i for i in range(mask.bit_length()) if mask >> i & 1]
