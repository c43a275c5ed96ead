"""Conversion of externally published graph instances into GraphFiles.

Two layouts are understood:

* node-link JSON: ``{"nodes": [{"id", "weight", ...}], "links"|"edges": [{"source", "target"}]}``
* a node table (``id weight [ligand_point receptor_point]`` per line) plus an
  edge list (``u v`` per line). ``#`` starts a comment.
"""
from __future__ import annotations

import json
from pathlib import Path

from .io import GraphFile, GraphVertex, ParseError, SchemaError


class CountMismatchError(SchemaError):
    pass


def _vertex_fields(node: dict, i: int):
    w = node.get("weight", node.get("w"))
    if w is None:
        raise SchemaError(f"node {i} has no weight")
    lig = node.get("ligand_point_id", node.get("ligand"))
    rec = node.get("receptor_point_id", node.get("receptor"))
    return float(w), ("" if lig is None else str(lig)), ("" if rec is None else str(rec))


def parse_node_link(text: str) -> tuple[list, list]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"node-link file is not valid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict) or "nodes" not in data:
        raise SchemaError("node-link document needs a 'nodes' list")
    links = data.get("links", data.get("edges"))
    if links is None:
        raise SchemaError("node-link document needs a 'links' or 'edges' list")
    nodes = [(n["id"] if isinstance(n, dict) and "id" in n else i, n) for i, n in enumerate(data["nodes"])]
    edges = []
    for e in links:
        if isinstance(e, dict):
            edges.append((e["source"], e["target"]))
        else:
            edges.append((e[0], e[1]))
    return nodes, edges


def parse_node_table(text: str) -> list:
    nodes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (2, 4):
            raise ParseError(f"expected 'id weight [ligand receptor]', got {raw!r}", lineno)
        try:
            w = float(parts[1])
        except ValueError:
            raise ParseError(f"bad weight {parts[1]!r}", lineno) from None
        node = {"weight": w}
        if len(parts) == 4:
            node["ligand"], node["receptor"] = parts[2], parts[3]
        nodes.append((parts[0], node))
    return nodes


def parse_edge_list(text: str) -> list:
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {raw!r}", lineno)
        edges.append((parts[0], parts[1]))
    return edges


def _id_key(x):
    s = str(x)
    return (0, int(s), s) if s.lstrip("-").isdigit() else (1, 0, s)


def build_graph_file(nodes: list, edges: list, kind: str,
                     expected_vertices: int | None = None,
                     expected_edges: int | None = None,
                     source: str | None = None) -> GraphFile:
    if kind not in ("BIG", "complement"):
        raise ValueError("kind must be 'BIG' or 'complement'")
    ordered = sorted(nodes, key=lambda t: _id_key(t[0]))
    index = {}
    vertices = []
    for i, (nid, node) in enumerate(ordered):
        key = str(nid)
        if key in index:
            raise SchemaError(f"duplicate node id {key!r}")
        index[key] = i
        w, lig, rec = _vertex_fields(node if isinstance(node, dict) else {"weight": node}, i)
        vertices.append(GraphVertex(i, w, lig, rec))
    pairs = set()
    for u, v in edges:
        try:
            a, b = index[str(u)], index[str(v)]
        except KeyError as exc:
            raise SchemaError(f"edge references unknown node {exc.args[0]!r}") from None
        if a == b:
            raise SchemaError(f"self-loop on node {u!r}")
        pairs.add((min(a, b), max(a, b)))
    if expected_vertices is not None and len(vertices) != expected_vertices:
        raise CountMismatchError(f"expected {expected_vertices} vertices, found {len(vertices)}")
    if expected_edges is not None and len(pairs) != expected_edges:
        raise CountMismatchError(f"expected {expected_edges} edges, found {len(pairs)}")
    meta = {"converted_from": source or "", "vertex_count": len(vertices), "edge_count": len(pairs)}
    return GraphFile(vertices, sorted(pairs), kind, meta)


def convert_published_instance(paths, kind: str = "BIG", expected_vertices: int | None = None,
                               expected_edges: int | None = None) -> GraphFile:
    """Read a published instance from one node-link JSON file or a (nodes, edges) pair."""
    paths = [Path(p) for p in ([paths] if isinstance(paths, (str, Path)) else paths)]
    if len(paths) == 1:
        nodes, edges = parse_node_link(paths[0].read_text())
    elif len(paths) == 2:
        nodes = parse_node_table(paths[0].read_text())
        edges = parse_edge_list(paths[1].read_text())
    else:
        raise ValueError("give one node-link JSON file or a node file and an edge file")
    return build_graph_file(nodes, edges, kind, expected_vertices, expected_edges,
                            source=",".join(p.name for p in paths))
