import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdock.graph import InteractionGraph, random_graph
from qdock.io import (Atom, ConformerEnsemble, FormatVersionError, GraphFile, GraphVertex,
                      ParseError, PharmacophorePoint, SchemaError, canonical_json, file_to_graph,
                      format_atom_records, graph_to_file, parse_ensemble, parse_pharmacophores,
                      parse_receptor_atoms, points_to_json, read_graph, write_graph)

PDB = """\
HEADER    TEST
ATOM      1  N   ALA A   1      11.104   6.134  -6.504  1.00  0.00           N
ATOM      2  CA  ALA A   1      11.639   6.071  -5.147  1.00  0.00           C
HETATM    3  O   HOH W   1       0.000   0.000   0.000  1.00  0.00
TER
ATOM      4 ZN   ZN  B   1       1.000   2.000   3.000  1.00  0.00          ZN
"""


def test_parse_atoms_columns_and_fallback():
    atoms = parse_receptor_atoms(PDB)
    assert [a.serial for a in atoms] == [1, 2, 3, 4]
    assert atoms[0].coords == (11.104, 6.134, -6.504)
    assert atoms[1].element == "C" and atoms[1].vdw_radius == 1.70
    # no element column: first letter of the name
    assert atoms[2].element == "O" and atoms[2].vdw_radius == 1.52
    assert atoms[3].element == "ZN"


def test_parse_atoms_unknown_element_gets_default(caplog):
    line = "ATOM      1  XX  UNK A   1       0.000   0.000   0.000  1.00  0.00          XQ"
    atoms = parse_receptor_atoms(line)
    assert atoms[0].vdw_radius == 1.5
    assert "XQ" in caplog.text


def test_parse_atoms_bad_coordinate_reports_line():
    bad = PDB.replace("11.639", "1x.639")
    with pytest.raises(ParseError) as err:
        parse_receptor_atoms(bad)
    assert err.value.line == 3


def test_atom_records_round_trip():
    coords = np.array([[1.0, -2.5, 3.25], [10.125, 0.0, -99.999]])
    text = format_atom_records([7, 8], ["C", "N"], coords)
    atoms = parse_receptor_atoms(text)
    assert [a.serial for a in atoms] == [7, 8]
    assert [a.element for a in atoms] == ["C", "N"]
    assert np.allclose([a.coords for a in atoms], coords, atol=5e-4)


def test_atom_validation():
    with pytest.raises(ValueError):
        Atom(1, "C", (0.0, 0.0, 0.0), 0.0)
    with pytest.raises(ValueError):
        Atom(1, "C", (float("nan"), 0.0, 0.0), 1.7)


def test_pharmacophore_validation():
    with pytest.raises(ValueError):
        PharmacophorePoint("a", "XX", (0, 0, 0))
    with pytest.raises(ValueError):
        PharmacophorePoint("a", "D", (0, 0, 0), "receptor")


def test_points_round_trip():
    pts = [PharmacophorePoint("p1", "D", (1.0, 2.0, 3.0), "receptor", 5),
           PharmacophorePoint("p2", "AR", (0.5, 0.0, -1.0), "receptor", 9)]
    assert parse_pharmacophores(points_to_json(pts)) == pts


@pytest.mark.parametrize("doc,msg", [
    ('{"id": "a"}', "array"),
    ('[{"id": "a", "family": "D", "x": 0, "y": 0, "z": 0},'
     ' {"id": "a", "family": "A", "x": 0, "y": 0, "z": 0}]', "duplicate"),
    ('[{"id": "a", "family": "Q", "x": 0, "y": 0, "z": 0}]', "family"),
    ('[{"id": "a", "family": "D", "x": 0, "y": 0}]', "record 0"),
])
def test_points_schema_errors(doc, msg):
    with pytest.raises(SchemaError, match=msg):
        parse_pharmacophores(doc)


def test_points_invalid_json_is_parse_error():
    with pytest.raises(ParseError):
        parse_pharmacophores('[{"id": ')


def test_ensemble_round_trip(toy):
    ens = parse_ensemble(toy.ensemble.to_json())
    assert ens.point_ids == toy.ensemble.point_ids
    assert ens.atom_serials == toy.ensemble.atom_serials
    assert np.array_equal(ens.point_coords, toy.ensemble.point_coords)
    assert np.array_equal(ens.atom_coords, toy.ensemble.atom_coords)
    assert ens.elements == toy.ensemble.elements
    assert ens.coords_of(["L2", "L0"]).shape == (2, 2, 3)


def test_ensemble_errors():
    with pytest.raises(SchemaError):
        parse_ensemble('{"conformers": []}')
    doc = {"conformers": [{"points": {"a": [0, 0, 0]}, "atoms": {"1": [0, 0, 0]}},
                          {"points": {"b": [0, 0, 0]}, "atoms": {"1": [0, 0, 0]}}]}
    with pytest.raises(SchemaError, match="differ"):
        parse_ensemble(json.dumps(doc))
    ens = parse_ensemble(json.dumps({"conformers": doc["conformers"][:1]}))
    with pytest.raises(Exception, match="not in the conformer ensemble"):
        ens.coords_of(["zz"])


def test_heavy_atom_mask():
    ens = ConformerEnsemble(["a"], [1, 2, 3], np.zeros((1, 1, 3)), np.zeros((1, 3, 3)),
                            {1: "C", 2: "H", 3: "O"})
    assert ens.heavy_atom_mask().tolist() == [True, False, True]


def test_canonical_json_is_sorted_and_stable():
    a = canonical_json({"b": 1, "a": [1.5, None, True], "c": {"z": 0.1, "y": -0.0}})
    assert a == '{"a":[1.5,null,true],"b":1,"c":{"y":0.0,"z":0.1}}'
    assert canonical_json({"x": 1.0}, fixed_floats=True) == '{"x":1.000000}'
    assert canonical_json([float("nan"), float("inf")]) == "[null,1e999]"


def _graph_files():
    @st.composite
    def build(draw):
        n = draw(st.integers(0, 12))
        weights = [draw(st.floats(0.0, 1.0, allow_nan=False)) for _ in range(n)]
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        edges = [p for p in pairs if draw(st.booleans())]
        verts = [GraphVertex(i, round(w, 6), f"l{i}", f"p{i}") for i, w in enumerate(weights)]
        return GraphFile(verts, edges, draw(st.sampled_from(["BIG", "complement"])), {"note": "x"})
    return build()


@settings(max_examples=60, deadline=None)
@given(_graph_files())
def test_graph_file_round_trip(gf):
    raw = write_graph(gf)
    back = read_graph(raw)
    assert back == gf
    assert write_graph(back) == raw


def test_graph_file_validation():
    with pytest.raises(SchemaError, match="dense"):
        GraphFile([GraphVertex(1, 0.5)], [])
    with pytest.raises(SchemaError, match="outside"):
        GraphFile([GraphVertex(0, 1.5)], [])
    with pytest.raises(SchemaError, match="self-loop"):
        GraphFile([GraphVertex(0, 0.5)], [(0, 0)])
    with pytest.raises(SchemaError, match="duplicate"):
        GraphFile([GraphVertex(0, 0.5), GraphVertex(1, 0.5)], [(0, 1), (1, 0)])
    with pytest.raises(SchemaError, match="outside"):
        GraphFile([GraphVertex(0, 0.5)], [(0, 3)])


def test_graph_file_version_check():
    raw = json.loads(write_graph(GraphFile([GraphVertex(0, 0.5)], [])))
    raw["format_version"] = 99
    with pytest.raises(FormatVersionError):
        read_graph(json.dumps(raw))


def test_interaction_graph_conversion(rng):
    g = random_graph(15, 0.4, rng)
    g = InteractionGraph(np.round(g.weights, 6), g.adjacency, "BIG",
                         [(f"l{i}", f"p{i}") for i in range(15)])
    back = file_to_graph(read_graph(write_graph(graph_to_file(g))))
    assert np.array_equal(back.adjacency, g.adjacency)
    assert np.array_equal(back.weights, g.weights)
    assert back.labels == g.labels and back.kind == "BIG"
