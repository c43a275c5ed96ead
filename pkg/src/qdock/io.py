"""Readers and writers for receptor atoms, pharmacophore points, conformer
ensembles and graph files.

All JSON written here is canonical (sorted keys, floats with six decimals) so
that identical inputs give identical bytes.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .graph import KINDS, InteractionGraph

log = logging.getLogger(__name__)

FAMILIES = ("NI", "PI", "D", "A", "H", "AR")
SIDES = ("ligand", "receptor")
GRAPH_FORMAT_VERSION = 1

# Bondi (1964) van der Waals radii in angstrom
BONDI_RADII = {
    "H": 1.20, "C": 1.70, "N": 1.55, "O": 1.52, "F": 1.47, "P": 1.80,
    "S": 1.80, "CL": 1.75, "BR": 1.85, "I": 1.98, "SE": 1.90, "SI": 2.10,
    "NA": 2.27, "K": 2.75, "MG": 1.73, "ZN": 1.39, "CU": 1.40, "NI": 1.63,
    "FE": 1.50, "CA": 2.31, "HE": 1.40, "NE": 1.54, "AR": 1.88, "KR": 2.02,
    "XE": 2.16, "LI": 1.82, "PD": 1.63, "AG": 1.72, "CD": 1.58, "PT": 1.75,
    "AU": 1.66, "HG": 1.55, "GA": 1.87, "AS": 1.85, "TE": 2.06, "SN": 2.17,
    "PB": 2.02, "U": 1.86,
}
DEFAULT_RADIUS = 1.5


class InputError(ValueError):
    """Malformed or inconsistent input data."""


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SchemaError(InputError):
    pass


class FormatVersionError(SchemaError):
    pass


@dataclass(frozen=True)
class Atom:
    serial: int
    element: str
    coords: tuple[float, float, float]
    vdw_radius: float
    name: str = ""
    resname: str = ""

    def __post_init__(self):
        if not self.vdw_radius > 0:
            raise ValueError(f"atom {self.serial}: vdw_radius must be positive")
        if not all(math.isfinite(c) for c in self.coords):
            raise ValueError(f"atom {self.serial}: non-finite coordinates")


@dataclass(frozen=True)
class PharmacophorePoint:
    id: str
    family: str
    coords: tuple[float, float, float]
    side: str = "ligand"
    parent_atom_serial: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"point {self.id!r}: unknown family {self.family!r}")
        if self.side not in SIDES:
            raise ValueError(f"point {self.id!r}: unknown side {self.side!r}")
        if self.side == "receptor" and self.parent_atom_serial is None:
            raise ValueError(f"receptor point {self.id!r} has no parent atom serial")


def parse_receptor_atoms(text: str, radii: Mapping[str, float] | None = None) -> list[Atom]:
    """Read fixed-column ATOM/HETATM records.

    The element is taken from columns 77-78, falling back to the first letter
    of the atom name. Elements absent from ``radii`` get ``DEFAULT_RADIUS``.
    """
    table = {k.upper(): v for k, v in (radii or BONDI_RADII).items()}
    atoms: list[Atom] = []
    unknown: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        record = line[:6].strip()
        if record not in ("ATOM", "HETATM"):
            continue
        try:
            serial = int(line[6:11])
            x, y, z = float(line[30:38]), float(line[38:46]), float(line[46:54])
        except ValueError:
            raise ParseError("malformed serial or coordinate field", lineno) from None
        if not all(math.isfinite(v) for v in (x, y, z)):
            raise ParseError("non-finite coordinate", lineno)
        name = line[12:16].strip()
        element = line[76:78].strip().upper() if len(line) >= 77 else ""
        if not element:
            element = "".join(ch for ch in name if ch.isalpha())[:1].upper()
        if not element:
            raise ParseError("cannot determine element", lineno)
        radius = table.get(element)
        if radius is None:
            unknown.add(element)
            radius = DEFAULT_RADIUS
        atoms.append(Atom(serial, element, (x, y, z), radius, name, line[17:20].strip()))
    if unknown:
        log.warning("no vdW radius for %s; using %.2f A", ", ".join(sorted(unknown)), DEFAULT_RADIUS)
    return atoms


def format_atom_records(serials: Sequence[int], elements: Sequence[str], coords,
                        resname: str = "LIG") -> str:
    """Write HETATM records that ``parse_receptor_atoms`` reads back."""
    lines = []
    for serial, element, (x, y, z) in zip(serials, elements, np.asarray(coords, dtype=float)):
        name = f"{element}{serial}"[:4]
        lines.append(
            f"HETATM{serial:5d} {name:<4s} {resname:>3s} L   1    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00          {element:>2s}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"


def _load_json(text: str | bytes, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: {exc.msg}", exc.lineno) from None


def _vector(value, context: str) -> tuple[float, float, float]:
    try:
        vec = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise SchemaError(f"{context}: coordinates must be three numbers") from None
    if len(vec) != 3 or not all(math.isfinite(v) for v in vec):
        raise SchemaError(f"{context}: coordinates must be three finite numbers")
    return vec


def parse_pharmacophores(text: str | bytes, side: str | None = None) -> list[PharmacophorePoint]:
    """Read a JSON array of ``{id, family, x, y, z, parent_serial?, side?}``.

    ``side`` overrides any per-record side.
    """
    data = _load_json(text, "points file")
    if not isinstance(data, list):
        raise SchemaError("points file must be a JSON array")
    points: list[PharmacophorePoint] = []
    seen: set[str] = set()
    for i, rec in enumerate(data):
        if not isinstance(rec, dict):
            raise SchemaError(f"record {i}: expected an object")
        pid = rec.get("id")
        if not isinstance(pid, str) or not pid:
            raise SchemaError(f"record {i}: missing string id")
        if pid in seen:
            raise SchemaError(f"record {i}: duplicate id {pid!r}")
        seen.add(pid)
        family = rec.get("family")
        if family not in FAMILIES:
            raise SchemaError(f"record {i} ({pid!r}): unknown family {family!r}")
        coords = _vector([rec.get("x"), rec.get("y"), rec.get("z")], f"record {i} ({pid!r})")
        parent = rec.get("parent_serial")
        if parent is not None and (isinstance(parent, bool) or not isinstance(parent, int)):
            raise SchemaError(f"record {i} ({pid!r}): parent_serial must be an integer")
        pside = side or rec.get("side", "ligand")
        try:
            points.append(PharmacophorePoint(pid, family, coords, pside, parent))
        except ValueError as exc:
            raise SchemaError(f"record {i}: {exc}") from None
    return points


def points_to_json(points: Iterable[PharmacophorePoint]) -> str:
    recs = []
    for p in points:
        rec: dict[str, Any] = {"id": p.id, "family": p.family, "side": p.side,
                               "x": p.coords[0], "y": p.coords[1], "z": p.coords[2]}
        if p.parent_atom_serial is not None:
            rec["parent_serial"] = p.parent_atom_serial
        recs.append(rec)
    return canonical_json(recs)


@dataclass
class ConformerEnsemble:
    """Coordinates of ligand points and atoms in each of ``M`` conformers."""

    point_ids: list[str]
    atom_serials: list[int]
    point_coords: np.ndarray  # (M, n_points, 3)
    atom_coords: np.ndarray  # (M, n_atoms, 3)
    elements: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        self.point_coords = np.asarray(self.point_coords, dtype=np.float64)
        self.atom_coords = np.asarray(self.atom_coords, dtype=np.float64)
        m = self.point_coords.shape[0]
        if m < 1:
            raise InputError("conformer ensemble is empty")
        if self.point_coords.shape != (m, len(self.point_ids), 3):
            raise InputError("point coordinate array does not match point ids")
        if self.atom_coords.shape != (m, len(self.atom_serials), 3):
            raise InputError("atom coordinate array does not match atom serials")
        self._point_index = {pid: i for i, pid in enumerate(self.point_ids)}

    @property
    def conformer_count(self) -> int:
        return self.point_coords.shape[0]

    def point_index(self, pid: str) -> int:
        try:
            return self._point_index[pid]
        except KeyError:
            raise InputError(f"ligand point {pid!r} is not in the conformer ensemble") from None

    def coords_of(self, pids: Sequence[str]) -> np.ndarray:
        """(M, len(pids), 3) coordinates of the requested points."""
        return self.point_coords[:, [self.point_index(p) for p in pids], :]

    def heavy_atom_mask(self) -> np.ndarray:
        return np.array([self.elements.get(s, "C").upper() != "H" for s in self.atom_serials])

    def to_json(self) -> str:
        confs = []
        for k in range(self.conformer_count):
            confs.append({
                "points": {pid: self.point_coords[k, i].tolist() for i, pid in enumerate(self.point_ids)},
                "atoms": {str(s): self.atom_coords[k, i].tolist() for i, s in enumerate(self.atom_serials)},
            })
        doc: dict[str, Any] = {"conformers": confs}
        if self.elements:
            doc["elements"] = {str(k): v for k, v in self.elements.items()}
        return canonical_json(doc)


def parse_ensemble(text: str | bytes) -> ConformerEnsemble:
    """Read ``{"conformers": [{"points": {...}, "atoms": {...}}], "elements"?: {...}}``."""
    data = _load_json(text, "ensemble file")
    if not isinstance(data, dict) or not isinstance(data.get("conformers"), list):
        raise SchemaError("ensemble file must be an object with a 'conformers' list")
    confs = data["conformers"]
    if not confs:
        raise SchemaError("ensemble has no conformers")
    point_ids: list[str] | None = None
    serials: list[int] | None = None
    pcoords, acoords = [], []
    for k, conf in enumerate(confs):
        if not isinstance(conf, dict):
            raise SchemaError(f"conformer {k}: expected an object")
        pts = conf.get("points", {})
        ats = conf.get("atoms", {})
        if not isinstance(pts, dict) or not isinstance(ats, dict):
            raise SchemaError(f"conformer {k}: 'points' and 'atoms' must be objects")
        try:
            these_serials = sorted(int(s) for s in ats)
        except ValueError:
            raise SchemaError(f"conformer {k}: atom keys must be integer serials") from None
        these_ids = sorted(pts)
        if point_ids is None:
            point_ids, serials = these_ids, these_serials
        elif these_ids != point_ids or these_serials != serials:
            raise SchemaError(f"conformer {k}: point ids or atom serials differ from conformer 0")
        pcoords.append([_vector(pts[p], f"conformer {k} point {p}") for p in point_ids])
        lookup = {int(s): v for s, v in ats.items()}
        acoords.append([_vector(lookup[s], f"conformer {k} atom {s}") for s in serials])
    elements = {}
    for s, e in (data.get("elements") or {}).items():
        try:
            elements[int(s)] = str(e)
        except ValueError:
            raise SchemaError("element keys must be integer serials") from None
    m = len(confs)
    return ConformerEnsemble(
        point_ids, serials,
        np.asarray(pcoords, dtype=float).reshape(m, len(point_ids), 3),
        np.asarray(acoords, dtype=float).reshape(m, len(serials), 3),
        elements,
    )


# --- canonical JSON -------------------------------------------------------------

def _encode(obj, out: list[str], fixed: bool) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            out.append("null" if math.isnan(value) else ("1e999" if value > 0 else "-1e999"))
        else:
            if fixed:
                text = f"{value:.6f}"
                out.append("0.000000" if text == "-0.000000" else text)
            else:
                out.append(repr(value + 0.0))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, Mapping):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key), ensure_ascii=False))
            out.append(":")
            _encode(obj[key], out, fixed)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _encode(item, out, fixed)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj, fixed_floats: bool = False) -> str:
    """Deterministic JSON text with sorted keys and no whitespace.

    Floats use the shortest round-tripping repr, or exactly six decimals when
    ``fixed_floats`` is set (graph files).
    """
    out: list[str] = []
    _encode(obj, out, fixed_floats)
    return "".join(out)


# --- graph files ----------------------------------------------------------------

@dataclass(frozen=True)
class GraphVertex:
    index: int
    weight: float
    ligand_point_id: str = ""
    receptor_point_id: str = ""


@dataclass
class GraphFile:
    vertices: list[GraphVertex]
    edges: list[tuple[int, int]]
    kind: str = "complement"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.edges = sorted((min(u, v), max(u, v)) for u, v in self.edges)
        validate_graph_file(self)

    def __eq__(self, other):
        if not isinstance(other, GraphFile):
            return NotImplemented
        return (self.vertices == other.vertices and self.edges == other.edges
                and self.kind == other.kind and self.metadata == other.metadata)


def validate_graph_file(g: GraphFile) -> None:
    if g.kind not in KINDS:
        raise SchemaError(f"unknown graph kind {g.kind!r}")
    n = len(g.vertices)
    for i, v in enumerate(g.vertices):
        if v.index != i:
            raise SchemaError(f"vertex indices must be dense 0..{n - 1}; got {v.index} at position {i}")
        if not (0.0 <= v.weight <= 1.0) or not math.isfinite(v.weight):
            raise SchemaError(f"vertex {i}: weight {v.weight} outside [0, 1]")
    prev = None
    for u, v in g.edges:
        if u == v:
            raise SchemaError(f"self-loop on vertex {u}")
        if u < 0 or v >= n:
            raise SchemaError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
        if (u, v) == prev:
            raise SchemaError(f"duplicate edge ({u}, {v})")
        prev = (u, v)


def write_graph(g: GraphFile) -> bytes:
    doc = {
        "format_version": GRAPH_FORMAT_VERSION,
        "kind": g.kind,
        "metadata": g.metadata,
        "vertices": [
            {"index": v.index, "weight": v.weight, "ligand_point_id": v.ligand_point_id,
             "receptor_point_id": v.receptor_point_id}
            for v in g.vertices
        ],
        "edges": [list(e) for e in g.edges],
    }
    return (canonical_json(doc, fixed_floats=True) + "\n").encode("utf-8")


def read_graph(data: bytes | str) -> GraphFile:
    doc = _load_json(data, "graph file")
    if not isinstance(doc, dict):
        raise SchemaError("graph file must be a JSON object")
    version = doc.get("format_version")
    if version != GRAPH_FORMAT_VERSION:
        raise FormatVersionError(f"unsupported graph format_version {version!r}")
    try:
        vertices = [
            GraphVertex(int(v["index"]), float(v["weight"]), str(v.get("ligand_point_id", "")),
                        str(v.get("receptor_point_id", "")))
            for v in doc["vertices"]
        ]
        edges = [(int(e[0]), int(e[1])) for e in doc["edges"] if len(e) == 2]
        if len(edges) != len(doc["edges"]):
            raise SchemaError("every edge must be a pair of indices")
        metadata = doc.get("metadata", {})
        kind = doc["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed graph file: {exc}") from None
    if not isinstance(metadata, dict):
        raise SchemaError("metadata must be an object")
    return GraphFile(vertices, edges, kind, metadata)


def graph_to_file(g: InteractionGraph, metadata: dict | None = None) -> GraphFile:
    labels = g.labels or [("", "")] * g.n
    meta = {"tool_version": __version__}
    meta.update(g.metadata)
    meta.update(metadata or {})
    vertices = [GraphVertex(i, float(w), l, p) for i, (w, (l, p)) in enumerate(zip(g.weights, labels))]
    return GraphFile(vertices, g.edges(), g.kind, meta)


def file_to_graph(gf: GraphFile) -> InteractionGraph:
    labels = [(v.ligand_point_id, v.receptor_point_id) for v in gf.vertices]
    if all(l == ("", "") for l in labels):
        labels = None
    return InteractionGraph.from_edges(
        len(gf.vertices), gf.edges, [v.weight for v in gf.vertices],
        kind=gf.kind, labels=labels, metadata=dict(gf.metadata),
    )
