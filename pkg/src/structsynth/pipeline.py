"""End-to-end solve: map -> regions -> structures -> conflicts -> search."""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .bbmst import SearchStats, SolutionTree, bbmst, validate_solution
from .buildpoints import BuildCandidate, extract_build_points
from .config import SolverParams
from .conflict import ConflictIndex, build_conflict_index
from .heightfield import HeightField, median_filter, quantize_levels
from .structure import BlockType, Structure, build_structure
from .terrain import RegionMap, build_region_map, prune_small_regions
from .waterfall import synthesize_all

EXIT_FEASIBLE = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_TIMEOUT = 3
EXIT_TIMEOUT_EMPTY = 4


@dataclass
class MetricsReport:
    map_size: int
    structures_generated: int
    regions: int
    branches_explored: int
    potential_conflicts: int
    cpf: float
    structure_time: float
    bbmst_time: float
    total_time: float
    blocks_used: int
    blocks_paper: int
    candidates: int = 0
    kruskal_calls: int = 0
    incumbent_updates: int = 0
    bound_violations: int = 0
    node_check_failures: int = 0
    timed_out: bool = False


TIMING_KEYS = ("structure_time", "bbmst_time", "total_time")


@dataclass
class SolveResult:
    field: HeightField
    params: SolverParams
    regions: RegionMap
    candidates: list[BuildCandidate]
    structures: list[Structure]
    conflicts: ConflictIndex
    solution: SolutionTree
    stats: SearchStats
    metrics: MetricsReport
    waterfall_diag: Counter = field(default_factory=Counter)

    @property
    def chosen(self) -> list[Structure]:
        by_id = {s.id: s for s in self.structures}
        return [by_id[i] for i in self.solution.chosen]

    @property
    def exit_code(self) -> int:
        if self.stats.timed_out:
            return EXIT_TIMEOUT if self.solution.feasible else EXIT_TIMEOUT_EMPTY
        return EXIT_FEASIBLE if self.solution.feasible else EXIT_INFEASIBLE


def preprocess(f: HeightField, median: int | None = None, quantize: int | None = None) -> HeightField:
    if median:
        f = median_filter(f, median)
    if quantize:
        f = quantize_levels(f, quantize)
    return f


def analyse(f: HeightField, p: SolverParams) -> RegionMap:
    return prune_small_regions(build_region_map(f, p), p, f.cell_size)


def solve(f: HeightField, p: SolverParams, threads: int = 1, timeout: float | None = None) -> SolveResult:
    t0 = time.perf_counter()
    m = analyse(f, p)
    candidates = extract_build_points(m, f, p)
    structs, diag = synthesize_all(candidates, f, m, p, threads=threads)
    t1 = time.perf_counter()
    conflicts = build_conflict_index(structs)
    solution, stats = bbmst(m.regions, structs, conflicts, m, p, f=f, timeout=timeout)
    t2 = time.perf_counter()
    by_id = {s.id: s for s in structs}
    chosen = [by_id[i] for i in solution.chosen]
    metrics = MetricsReport(
        map_size=f.width * f.height,
        structures_generated=len(structs),
        regions=len(m.regions),
        branches_explored=stats.branches_explored,
        potential_conflicts=len(conflicts.pair_conflicts),
        cpf=conflicts.cpf,
        structure_time=t1 - t0,
        bbmst_time=t2 - t1,
        total_time=time.perf_counter() - t0,
        blocks_used=sum(s.cost_blocks for s in chosen),
        blocks_paper=sum(s.cost_paper for s in chosen),
        candidates=len(candidates),
        kruskal_calls=stats.kruskal_calls,
        incumbent_updates=stats.incumbent_updates,
        bound_violations=stats.bound_violations,
        node_check_failures=stats.node_check_failures,
        timed_out=stats.timed_out,
    )
    return SolveResult(f, p, m, candidates, structs, conflicts, solution, stats, metrics, diag)


# ------------------------------------------------------------ documents

class Exact(float):
    """Float written with round-trip precision instead of 6 decimals."""


def _encode(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return "null"
        if isinstance(obj, Exact):
            return repr(float(obj))
        text = f"{float(obj):.6f}"
        return "0.000000" if text == "-0.000000" else text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with insertion key order and 6-decimal fixed-point floats."""
    return _encode(obj) + "\n"


def structure_doc(s: Structure) -> dict:
    return {
        "id": s.id,
        "b": [Exact(s.b[0]), Exact(s.b[1])],
        "u": [Exact(s.u[0]), Exact(s.u[1])],
        "region_a": s.region_a,
        "region_b": s.region_b,
        "heights": s.heights,
        "terminators": [t.value for t in s.types],
        "corners": [[[float(x), float(y)] for x, y in c.corners] for c in s.cells],
        "cost_blocks": s.cost_blocks,
        "cost_paper": s.cost_paper,
    }


def solution_doc(res: SolveResult) -> dict:
    sol = res.solution
    return {
        "map": {"width": res.field.width, "height": res.field.height,
                "cell_size": float(res.field.cell_size)},
        "params": {k: (float(v) if isinstance(v, float) else v) for k, v in res.params.to_dict().items()},
        "feasible": sol.feasible,
        "spanning": sol.spanning,
        "timed_out": res.stats.timed_out,
        "total_cost": sol.total_cost,
        "blocks_used": res.metrics.blocks_used,
        "blocks_paper": res.metrics.blocks_paper,
        "regions": [{"id": r.id, "size": r.size, "representative": list(r.representative)}
                    for r in res.regions.regions],
        "region_splits": [{"region": r, "pieces": list(sub)} for r, sub in sol.region_splits],
        "structures": [structure_doc(s) for s in res.chosen],
        "diagnostics": {
            "candidates": [{"b": list(c.b), "u": list(c.u), "top_region": c.top_region,
                            "flatness_error": c.flatness_error} for c in res.candidates],
            "waterfall": dict(sorted(res.waterfall_diag.items())),
            "structures_generated": len(res.structures),
        },
    }


def metrics_doc(metrics: MetricsReport, mask_timings: bool = False) -> dict:
    doc = asdict(metrics)
    if mask_timings:
        for k in TIMING_KEYS:
            doc[k] = 0.0
    return doc


def load_solution(text: str, f: HeightField, m: RegionMap, p: SolverParams) -> list[Structure]:
    """Rebuild the chosen structures of a solution document against a map."""
    doc = json.loads(text)
    out = []
    for s in doc["structures"]:
        out.append(build_structure(s["b"], s["u"], s["heights"], [BlockType(t) for t in s["terminators"]],
                                   f, p, s["region_a"], s["region_b"], m.labels, s["id"]))
    return out


def revalidate(text: str, f: HeightField, p: SolverParams) -> tuple[bool, bool]:
    m = analyse(f, p)
    return validate_solution(load_solution(text, f, m, p), f, m, p)
