"""End-to-end orchestration: configs, stage execution, run records, grid search."""
from __future__ import annotations

import csv
import hashlib
import io as _io
import itertools
import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .big import BigConfig, build_big, select_receptor_scope
from .emulator import EmulatorConfig
from .graph import InteractionGraph
from .io import (ConformerEnsemble, InputError, canonical_json, format_atom_records,
                 graph_to_file, parse_ensemble, parse_pharmacophores, parse_receptor_atoms,
                 write_graph)
from .mwis import HeuristicConfig, IndependentSetSolution, solve_decomposition, solve_exact, solve_greedy
from .pose import ContactSet, reconstruct
from .potentials import PotentialTable
from .sasa import SasaConfig, filter_points, shrake_rupley

WORKERS_ENV = "QDOCK_WORKERS"
METHODS = ("exact", "greedy", "quantum")
STAGES = ("sasa", "build-graph", "complement", "solve", "reconstruct")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class SolverTimeout(RuntimeError):
    pass


def worker_cap(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass
class RunConfig:
    receptor_atoms: str | None = None
    receptor_points: str | None = None
    ligand_points: str | None = None
    ensemble: str | None = None
    ligand_pose: str | None = None  # initial-pose atoms for the scope cut
    reference: str | None = None  # reference ligand atoms for the RMSD
    output_dir: str | None = None
    method: str = "quantum"
    seed: int = 0
    timeout: float | None = None
    sasa: dict = field(default_factory=dict)
    big: dict = field(default_factory=dict)
    emulator: dict = field(default_factory=dict)
    heuristic: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        # fail early on misspelled keys
        self.sasa_config()
        self.big_config()
        self.emulator_config()
        self.heuristic_config()

    def sasa_config(self) -> SasaConfig:
        return SasaConfig(**self.sasa)

    def big_config(self) -> BigConfig:
        opts = dict(self.big)
        if "potentials" in opts:
            opts["table"] = PotentialTable.from_mapping(opts.pop("potentials"))
        return BigConfig(**opts)

    def emulator_config(self) -> EmulatorConfig:
        return EmulatorConfig(**{"seed": self.seed, **self.emulator})

    def heuristic_config(self) -> HeuristicConfig:
        return HeuristicConfig(**{"seed": self.seed, **self.heuristic})

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | os.PathLike) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
        if not isinstance(data, dict):
            raise InputError(f"config {path}: expected a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, overrides: dict[str, Any]) -> RunConfig:
        """Apply ``{"heuristic.k": 3, "seed": 1}``-style overrides."""
        data = json.loads(json.dumps(self.to_dict()))
        for key, value in overrides.items():
            head, _, tail = key.partition(".")
            if head not in data:
                raise ValueError(f"unknown config key {head!r}")
            if tail:
                if not isinstance(data[head], dict):
                    raise ValueError(f"config key {head!r} has no sub-fields")
                data[head][tail] = value
            else:
                data[head] = value
        return RunConfig.from_dict(data)


def parse_override(text: str) -> tuple[str, Any]:
    key, sep, raw = text.partition("=")
    if not sep:
        raise ValueError(f"override must look like key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


@dataclass
class RunRecord:
    config: dict
    tool_version: str
    timings: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)
    solution: dict | None = None
    pose: dict | None = None
    warnings: list[str] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def solution_bytes(self) -> bytes:
        return canonical_json({"solution": self.solution, "pose": self.pose}).encode()


def _read(path: str | None, what: str) -> str:
    if path is None:
        raise InputError(f"no {what} path configured")
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} file not found: {path}")
    return p.read_text()


def read_ligand_atoms(path: str) -> tuple[list[int], np.ndarray]:
    atoms = parse_receptor_atoms(_read(path, "ligand atoms"))
    return [a.serial for a in atoms], np.array([a.coords for a in atoms], dtype=float).reshape(-1, 3)


def solve_graph(complement_graph: InteractionGraph, method: str, hcfg: HeuristicConfig | None = None,
                ecfg: EmulatorConfig | None = None, timeout: float | None = None) -> IndependentSetSolution:
    """MWIS of the complement graph by the chosen method."""
    if method == "exact":
        return solve_exact(complement_graph, timeout)
    if method == "greedy":
        return solve_greedy(complement_graph)
    if method == "quantum":
        return solve_decomposition(complement_graph, hcfg=hcfg, ecfg=ecfg)
    raise ValueError(f"unknown method {method!r}")


def plot_data(solution: IndependentSetSolution) -> dict[str, str]:
    """CSV tables for weight-vs-level traces and subgraph-size histograms."""
    out = {}
    levels = solution.provenance.get("levels")
    if levels:
        buf = _io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(levels[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(levels)
        out["levels.csv"] = buf.getvalue()
    sizes = solution.provenance.get("subgraph_sizes")
    if sizes:
        values, counts = np.unique(sizes, return_counts=True)
        out["subgraph_sizes.csv"] = "size,count\n" + "".join(f"{v},{c}\n" for v, c in zip(values, counts))
    return out


class _Runner:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.record = RunRecord(cfg.to_dict(), __version__)
        self.out = Path(cfg.output_dir) if cfg.output_dir else None
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def persist(self, name: str, data: bytes | str) -> None:
        raw = data.encode() if isinstance(data, str) else data
        self.record.artifacts[name] = hashlib.sha256(raw).hexdigest()
        if self.out:
            (self.out / name).write_bytes(raw)

    def stage(self, name: str, fn):
        t0 = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                result = fn()
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc
            finally:
                self.record.timings[name] = round(time.perf_counter() - t0, 6)
        self.record.warnings.extend(f"[{name}] {w.message}" for w in caught)
        return result

    def run(self) -> RunRecord:
        cfg = self.cfg
        bcfg = cfg.big_config()

        def do_sasa():
            points = parse_pharmacophores(_read(cfg.receptor_points, "receptor points"), side="receptor")
            ligand = parse_pharmacophores(_read(cfg.ligand_points, "ligand points"), side="ligand")
            if cfg.ligand_pose:
                pose = read_ligand_atoms(cfg.ligand_pose)[1]
            else:
                pose = np.array([p.coords for p in ligand])
            scoped = select_receptor_scope(points, pose, bcfg.receptor_cutoff)
            info = {"receptor_points": len(points), "in_scope": len(scoped)}
            if cfg.receptor_atoms:
                atoms = parse_receptor_atoms(_read(cfg.receptor_atoms, "receptor atoms"))
                scfg = cfg.sasa_config()
                areas = shrake_rupley(atoms, scfg)
                kept, removed = filter_points(scoped, areas, scfg.threshold)
                self.persist("sasa.json", canonical_json({
                    "sasa": {str(k): v for k, v in sorted(areas.items())},
                    "kept_ids": [p.id for p in kept], "removed_ids": [p.id for p in removed]}))
            else:
                warnings.warn("no receptor atoms configured; SASA filter not applied")
                kept, removed = scoped, []
            info.update(kept=len(kept), removed=len(removed))
            self.record.stages["sasa"] = info
            return ligand, kept

        ligand, kept = self.stage("sasa", do_sasa)

        def do_build():
            ens = parse_ensemble(_read(cfg.ensemble, "ensemble"))
            big = build_big(ligand, kept, ens, bcfg)
            self.persist("big.json", write_graph(graph_to_file(big)))
            self.record.stages["build-graph"] = {"vertices": big.n, "edges": big.edge_count}
            return ens, big

        ens, big = self.stage("build-graph", do_build)

        def do_complement():
            comp = big.complement()
            self.persist("complement.json", write_graph(graph_to_file(comp)))
            self.record.stages["complement"] = {"vertices": comp.n, "edges": comp.edge_count}
            return comp

        comp = self.stage("complement", do_complement)

        def do_solve():
            sol = solve_graph(comp, cfg.method, cfg.heuristic_config(), cfg.emulator_config(), cfg.timeout)
            if not (sol.independent and sol.maximal):
                raise RuntimeError("solver returned an invalid solution")
            self.record.solution = sol.to_dict(comp)
            self.persist("solution.json", canonical_json(self.record.solution))
            for name, text in plot_data(sol).items():
                self.persist(name, text)
            return sol

        sol = self.stage("solve", do_solve)

        def do_reconstruct():
            if not sol.vertices:
                raise InputError("solution is empty; nothing to superpose")
            rcoords = {p.id: p.coords for p in kept}
            contacts = ContactSet.from_labels([comp.labels[v] for v in sol.vertices], rcoords,
                                              comp.weights[list(sol.vertices)])
            reference = None
            if cfg.reference:
                reference = _reference_in_order(ens, cfg.reference)
            pose = reconstruct(contacts, ens, reference)
            self.record.pose = pose.report()
            elements = [ens.elements.get(s, "C") for s in pose.atom_serials]
            self.persist("pose.pdb", format_atom_records(pose.atom_serials, elements, pose.coords))
            return pose

        self.stage("reconstruct", do_reconstruct)
        if sol.optimal is False:
            self.record.warnings.append("[solve] exact search timed out; solution may be suboptimal")
        return self.record


def _reference_in_order(ens: ConformerEnsemble, path: str) -> np.ndarray:
    serials, coords = read_ligand_atoms(path)
    lookup = dict(zip(serials, coords))
    missing = [s for s in ens.atom_serials if s not in lookup]
    if missing:
        raise InputError(f"reference is missing atom serials {missing[:5]}")
    return np.array([lookup[s] for s in ens.atom_serials])


def pipeline(cfg: RunConfig) -> RunRecord:
    """sasa -> build-graph -> complement -> solve -> reconstruct, one record for the run."""
    runner = _Runner(cfg)
    record = runner.run()
    if runner.out:
        (runner.out / "run_record.json").write_text(record.to_json() + "\n")
    return record


# --- grid search ----------------------------------------------------------------

GRID_FIELDS = ("k", "s", "l", "weight", "ratio", "mean_weight", "seeds", "error")


def _grid_row(args) -> dict:
    g, k, s, l, seeds, base, ecfg, optimum = args
    weights, errors = [], []
    for seed in seeds:
        try:
            h = replace(base, k=k, s=s, l=l, seed=seed)
            weights.append(solve_decomposition(g, hcfg=h, ecfg=ecfg).weight)
        except Exception as exc:  # recorded per row, the sweep continues
            errors.append(f"seed {seed}: {type(exc).__name__}: {exc}")
    best = max(weights) if weights else None
    return {"k": k, "s": s, "l": l, "weight": best,
            "ratio": None if best is None or not optimum else best / optimum,
            "mean_weight": float(np.mean(weights)) if weights else None,
            "seeds": len(weights), "error": "; ".join(errors)}


def grid_search(g: InteractionGraph, k_range: Sequence[int], s_range: Sequence[int],
                l_range: Sequence[int], seeds: Sequence[int] = (0,),
                base: HeuristicConfig | None = None, ecfg: EmulatorConfig | None = None,
                optimum: float | None = None, workers: int | None = None) -> list[dict]:
    """One row per (k, s, l): best and mean weight over ``seeds`` and the ratio to ``optimum``."""
    base = base or HeuristicConfig()
    jobs = [(g, k, s, l, tuple(seeds), base, ecfg, optimum)
            for k, s, l in itertools.product(k_range, s_range, l_range)]
    workers = worker_cap() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            return list(pool.map(_grid_row, jobs))
    return [_grid_row(j) for j in jobs]


def grid_csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=GRID_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r[k] is None else (f"{r[k]:.4f}" if isinstance(r[k], float) else r[k]))
                    for k in GRID_FIELDS})
    return buf.getvalue()
