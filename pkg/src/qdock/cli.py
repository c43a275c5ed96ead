"""Command line interface: ``qdock <subcommand> ...``.

Exit codes: 0 success, 1 usage, 2 input error, 3 solver timeout.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .big import build_big, select_receptor_scope
from .convert import convert_published_instance
from .emulator import EmulatorConfig, run_request
from .io import (InputError, canonical_json, file_to_graph, format_atom_records, graph_to_file,
                 parse_ensemble, parse_pharmacophores, parse_receptor_atoms, read_graph, write_graph)
from .mwis import HeuristicConfig, verify_solution
from .pipeline import (RunConfig, StageError, grid_csv, grid_search, parse_override, pipeline,
                       plot_data, read_ligand_atoms, solve_graph)
from .pose import ContactSet, reconstruct
from .sasa import SasaConfig, filter_points, shrake_rupley

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_TIMEOUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {path}")
    return p.read_text()


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load_graph(path: str):
    g = file_to_graph(read_graph(_read(path)))
    if g.kind == "BIG":
        g = g.complement()
    return g


def _json_file(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(_read(path))
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data


# --- subcommands ----------------------------------------------------------------

def cmd_sasa(a) -> int:
    atoms = parse_receptor_atoms(_read(a.atoms))
    cfg = SasaConfig(a.probe, a.sphere_points, a.threshold)
    areas = shrake_rupley(atoms, cfg)
    doc = {"sasa": {str(k): v for k, v in sorted(areas.items())}}
    if a.points:
        kept, removed = filter_points(parse_pharmacophores(_read(a.points), side="receptor"), areas,
                                      cfg.threshold)
        doc.update(kept_ids=[p.id for p in kept], removed_ids=[p.id for p in removed])
    _emit(canonical_json(doc), a.output)
    return EXIT_OK


def cmd_build_graph(a) -> int:
    cfg = RunConfig(big=_json_file(a.config).get("big", {})).big_config()
    overrides = {k: v for k, v in (("epsilon", a.epsilon), ("receptor_cutoff", a.cutoff)) if v is not None}
    if overrides:
        cfg = replace(cfg, **overrides)
    ligand = parse_pharmacophores(_read(a.ligand_points), side="ligand")
    receptor = parse_pharmacophores(_read(a.receptor_points), side="receptor")
    if a.ligand_pose:
        receptor = select_receptor_scope(receptor, read_ligand_atoms(a.ligand_pose)[1], cfg.receptor_cutoff)
    ens = parse_ensemble(_read(a.ensemble))
    big = build_big(ligand, receptor, ens, cfg)
    Path(a.big_out).write_bytes(write_graph(graph_to_file(big)))
    comp = big.complement()
    Path(a.complement_out).write_bytes(write_graph(graph_to_file(comp)))
    prov = {"tool_version": __version__, "construction": cfg.record(),
            "inputs": {"ligand_points": a.ligand_points, "receptor_points": a.receptor_points,
                       "ensemble": a.ensemble, "ligand_pose": a.ligand_pose},
            "big": {"vertices": big.n, "edges": big.edge_count},
            "complement": {"vertices": comp.n, "edges": comp.edge_count}}
    _emit(canonical_json(prov), a.provenance)
    return EXIT_OK


def cmd_anneal(a) -> int:
    _emit(canonical_json(run_request(json.loads(_read(a.request)))), a.output)
    return EXIT_OK


def _heuristic(a) -> HeuristicConfig:
    return HeuristicConfig(k=a.k, s=a.s, l=a.l, subsolver=a.subsolver, seed=a.seed,
                           max_atoms=a.max_atoms)


def _emulator(a) -> EmulatorConfig:
    return EmulatorConfig(**{"seed": a.seed, **_json_file(a.emulator_config)})


def cmd_solve(a) -> int:
    g = _load_graph(a.graph)
    sol = solve_graph(g, a.method, _heuristic(a), _emulator(a), a.timeout)
    doc = sol.to_dict(g)
    doc["tool_version"] = __version__
    _emit(canonical_json(doc), a.output)
    if a.plot_dir:
        d = Path(a.plot_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, text in plot_data(sol).items():
            (d / name).write_text(text)
    if sol.optimal is False:
        print("exact search timed out; best set found so far was written", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_grid(a) -> int:
    g = _load_graph(a.graph)
    optimum = a.optimum
    if optimum is None and a.compute_optimum:
        ref = solve_graph(g, "exact", timeout=a.timeout)
        if ref.optimal is False:
            print("exact reference timed out; ratio column left empty", file=sys.stderr)
        else:
            optimum = ref.weight
    base = HeuristicConfig(subsolver=a.subsolver, max_atoms=a.max_atoms)
    rows = grid_search(g, a.k, a.s, a.l, a.seeds, base, _emulator(a), optimum)
    if a.csv:
        Path(a.csv).write_text(grid_csv(rows))
    _emit(canonical_json({"optimum": optimum, "rows": rows, "tool_version": __version__}), a.output)
    return EXIT_OK


def cmd_reconstruct(a) -> int:
    sol = json.loads(_read(a.solution))
    contacts = sol.get("contacts") if isinstance(sol, dict) else None
    if not contacts:
        raise InputError("solution record has no contacts")
    receptor = parse_pharmacophores(_read(a.receptor_points), side="receptor")
    ens = parse_ensemble(_read(a.ensemble))
    cs = ContactSet.from_labels([tuple(c) for c in contacts], {p.id: p.coords for p in receptor})
    reference = None
    if a.reference:
        serials, coords = read_ligand_atoms(a.reference)
        lookup = dict(zip(serials, coords))
        try:
            reference = np.array([lookup[s] for s in ens.atom_serials])
        except KeyError as exc:
            raise InputError(f"reference lacks atom serial {exc.args[0]}") from None
    pose = reconstruct(cs, ens, reference)
    elements = [ens.elements.get(s, "C") for s in pose.atom_serials]
    _emit(format_atom_records(pose.atom_serials, elements, pose.coords), a.pdb_out)
    report = pose.report()
    _emit(canonical_json({k: report[k] for k in ("conformer", "residual", "rmsd", "underdetermined",
                                                   "rotation", "translation")}), a.report_out)
    return EXIT_OK


def cmd_pipeline(a) -> int:
    cfg = RunConfig.load(a.config) if a.config else RunConfig()
    overrides = dict(parse_override(s) for s in a.set or [])
    for key in ("method", "seed", "timeout", "output_dir"):
        if getattr(a, key) is not None:
            overrides[key] = getattr(a, key)
    cfg = cfg.with_overrides(overrides)
    record = pipeline(cfg)
    _emit(record.to_json(), a.output)
    if record.solution and record.solution.get("optimal") is False:
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_convert(a) -> int:
    gf = convert_published_instance(a.files, a.kind, a.expect_vertices, a.expect_edges)
    raw = write_graph(gf)
    if a.output:
        Path(a.output).write_bytes(raw)
    else:
        sys.stdout.write(raw.decode())
    n = len(gf.vertices)
    print(f"vertices={n} edges={len(gf.edges)} kind={gf.kind} "
          f"complement_edges={n * (n - 1) // 2 - len(gf.edges)}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(a) -> int:
    g = _load_graph(a.graph)
    sol = json.loads(_read(a.solution))
    v = verify_solution(g, sol["vertices"])
    _emit(canonical_json({"independent": v.independent, "maximal": v.maximal, "weight": v.weight}), None)
    return EXIT_OK if v.independent else EXIT_INPUT


# --- parser ---------------------------------------------------------------------

def _solver_flags(p, with_method=True):
    if with_method:
        p.add_argument("--method", choices=("exact", "greedy", "quantum"), default="exact")
    p.add_argument("--subsolver", choices=("quantum", "exact"), default="quantum")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=None, help="exact-solver budget in seconds")
    p.add_argument("--max-atoms", type=int, default=None, help="cap on embedded subgraph size")
    p.add_argument("--emulator-config", help="JSON object of emulator settings")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qdock", description="Pharmacophore docking via interaction-graph MWIS.")
    ap.add_argument("--version", action="version", version=f"qdock {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sasa", help="per-atom SASA and buried-point filter")
    p.add_argument("--atoms", required=True, help="receptor ATOM/HETATM records")
    p.add_argument("--points", help="receptor pharmacophore points JSON")
    p.add_argument("--probe", type=float, default=1.4)
    p.add_argument("--sphere-points", type=int, default=960)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sasa)

    p = sub.add_parser("build-graph", help="build the interaction graph and its complement")
    p.add_argument("--ligand-points", required=True)
    p.add_argument("--receptor-points", required=True)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--ligand-pose", help="initial-pose atoms; applies the receptor cutoff")
    p.add_argument("--config", help="run config JSON (its 'big' section is used)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--big-out", required=True)
    p.add_argument("--complement-out", required=True)
    p.add_argument("--provenance", help="provenance JSON path (default stdout)")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("anneal", help="emulate one anneal from a JSON request")
    p.add_argument("--request", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("solve", help="MWIS of a graph file (BIG files are complemented first)")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--s", type=int, default=4)
    p.add_argument("--l", type=int, default=10)
    _solver_flags(p)
    p.add_argument("--plot-dir", help="write level and subgraph-size CSVs here")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("grid", help="sweep heuristic hyperparameters")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=_int_list, default=[1, 2, 3])
    p.add_argument("--s", type=_int_list, default=[1, 2, 3, 4])
    p.add_argument("--l", type=_int_list, default=[10])
    p.add_argument("--seeds", type=_int_list, default=[0],
                   help="comma-separated seed list")
    p.add_argument("--optimum", type=float, help="reference weight for the ratio column")
    p.add_argument("--compute-optimum", action="store_true", help="run the exact solver for the ratio")
    _solver_flags(p, with_method=False)
    p.add_argument("--csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("reconstruct", help="superpose the best conformer onto a contact set")
    p.add_argument("--solution", required=True)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--receptor-points", required=True)
    p.add_argument("--reference", help="reference ligand atoms for the RMSD")
    p.add_argument("--pdb-out")
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("pipeline", help="run every stage from a config file")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    p.add_argument("--method", choices=("exact", "greedy", "quantum"))
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--output-dir")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("convert", help="convert a published node/edge instance to a graph file")
    p.add_argument("files", nargs="+", help="node-link JSON, or a node table and an edge list")
    p.add_argument("--kind", choices=("BIG", "complement"), default="BIG")
    p.add_argument("--expect-vertices", type=int)
    p.add_argument("--expect-edges", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("verify", help="check a solution record against a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"qdock: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"qdock: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, TypeError) as exc:
        print(f"qdock: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
