"""Seeded benchmark maps: random checkerboards and small conflict instances."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .buildpoints import BuildCandidate, extract_build_points
from .config import CheckerboardSpec, SolverParams
from .heightfield import HeightField
from .pipeline import analyse, solve
from .structure import Structure
from .terrain import RegionMap
from .waterfall import synthesize_all

OUTCOMES = ("solved", "infeasible", "timeout")


def checkerboard(spec: CheckerboardSpec, seed: int | None = None) -> HeightField:
    """n x n board of square plateaus at random multiples of ``increment``."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    steps = int(math.floor(spec.top / spec.increment + 1e-9))
    levels = rng.integers(0, steps + 1, size=(spec.n, spec.n)) * spec.increment
    z = np.kron(levels, np.ones((spec.side, spec.side)))
    return HeightField(z, spec.cell_size)


def time_histogram(times, per_decade: int = 2) -> list[dict]:
    """Counts of run times in log-spaced bins (``per_decade`` bins per factor 10)."""
    times = [t for t in times if t > 0]
    if not times:
        return []
    lo = math.floor(math.log10(min(times)) * per_decade)
    hi = math.floor(math.log10(max(times)) * per_decade)
    counts = {k: 0 for k in range(lo, hi + 1)}
    for t in times:
        counts[math.floor(math.log10(t) * per_decade)] += 1
    return [{"lo": 10 ** (k / per_decade), "hi": 10 ** ((k + 1) / per_decade), "count": c}
            for k, c in counts.items()]


@dataclass
class TrialResult:
    trial: int
    seed: int
    outcome: str
    structures: int
    regions: int
    blocks_used: int
    branches_explored: int
    cpf: float
    wall_time: float


def run_bench(spec: CheckerboardSpec, trials: int, p: SolverParams, timeout: float | None = None,
              threads: int = 1, keep=None) -> dict:
    """Solve ``trials`` boards with seeds ``spec.seed + k``; returns a summary document.

    ``keep``, when given, is called with ``(trial, field, result)`` for each run.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for k in range(trials):
        seed = spec.seed + k
        f = checkerboard(spec, seed)
        t0 = time.perf_counter()
        res = solve(f, p, threads=threads, timeout=timeout)
        dt = time.perf_counter() - t0
        if res.stats.timed_out:
            outcome = "timeout"
        elif res.solution.feasible:
            outcome = "solved"
        else:
            outcome = "infeasible"
        rows.append(TrialResult(k, seed, outcome, len(res.structures), len(res.regions.regions),
                                res.metrics.blocks_used, res.stats.branches_explored,
                                res.conflicts.cpf, dt))
        if keep is not None:
            keep(k, f, res)
    counts = {o: sum(r.outcome == o for r in rows) for o in OUTCOMES}
    return {
        "spec": {"n": spec.n, "square_side": spec.side, "height_max": spec.top,
                 "increment": float(spec.increment), "seed": spec.seed, "trials": trials},
        "counts": counts,
        "histogram": time_histogram([r.wall_time for r in rows]),
        "trials": [vars(r) for r in rows],
    }


def mask_bench_timings(doc: dict) -> dict:
    """Copy of a bench document with every wall-clock field zeroed."""
    out = dict(doc)
    out["histogram"] = []
    out["trials"] = [dict(r, wall_time=0.0) for r in doc["trials"]]
    return out


# ------------------------------------------------------- small instances

def terrace_field(rng: np.random.Generator, size: int = 40, blocks: int = 3,
                  cell_size: float = 1.0) -> HeightField:
    """Flat ground with a few random rectangular plateaus of random heights."""
    z = np.zeros((size, size))
    for _ in range(blocks):
        w, h = rng.integers(10, size // 2 + 6, size=2)
        x0 = rng.integers(0, size - w + 1)
        y0 = rng.integers(0, size - h + 1)
        z[y0:y0 + h, x0:x0 + w] = rng.integers(1, 4) * 8.0
    return HeightField(z, cell_size)


def small_instance(seed: int, p: SolverParams, max_regions: int = 5, max_structs: int = 8,
                   size: int = 40, attempts: int = 50):
    """Random map plus up to ``max_structs`` of its Waterfall structures.

    Returns ``(field, regions, structures)`` with structure ids renumbered
    from 0. Maps are redrawn until they have 2..max_regions regions.
    """
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        f = terrace_field(rng, size, int(rng.integers(1, 4)))
        m: RegionMap = analyse(f, p)
        if not 2 <= len(m.regions) <= max_regions:
            continue
        structs, _ = synthesize_all(extract_build_points(m, f, p), f, m, p)
        if not structs:
            continue
        k = int(rng.integers(1, max_structs + 1))
        pick = sorted(rng.choice(len(structs), size=min(k, len(structs)), replace=False))
        chosen: list[Structure] = [structs[i].with_id(n) for n, i in enumerate(pick)]
        return f, m, chosen
    raise RuntimeError(f"no usable instance for seed {seed}")


# ---------------------------------------------------- synthetic terrain

def stairs_field(treads: int = 7, depth: int = 40, width: int = 40, riser: float = 16.0,
                 cell_size: float = 1.0) -> HeightField:
    """Staircase descending along +x: ``treads`` flat treads, ``treads - 1`` risers."""
    z = np.zeros((width, treads * depth))
    for k in range(treads):
        z[:, k * depth:(k + 1) * depth] = (treads - 1 - k) * riser
    return HeightField(z, cell_size)


def profile_field(profile, cell: int = 8, rows: int = 9) -> HeightField:
    """Extrude a per-cell height profile along x; each entry spans ``cell`` nodes."""
    z = np.repeat(np.asarray(profile, dtype=float), cell)[None, :].repeat(rows, axis=0)
    return HeightField(z)


def profile_candidate(m: RegionMap, cell: int = 8, rows: int = 9):
    """Build point on the boundary between the first two profile cells, facing +x."""
    mid = rows // 2
    return BuildCandidate((cell - 0.5, float(mid)), (1.0, 0.0), int(m.labels[mid, 0]), 0.0)


def descent_field(n: int, drop: float = 12.0, cell: int = 8, rows: int = 9) -> HeightField:
    """Terrace falling ``drop`` cm per cell for ``n`` cells, then flat floor.

    A structure from the top must descend one cell per terrace, so its length
    grows linearly with ``n``.
    """
    prof = [drop * (n - k) for k in range(n)] + [0.0, 0.0, 0.0]
    return profile_field(prof, cell, rows)
