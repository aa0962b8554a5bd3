"""Cheapest valid structure at a build point (three-pass bound propagation)."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .buildpoints import BuildCandidate
from .config import ParameterError, SolverParams
from .heightfield import HeightField
from .structure import (BlockType, Structure, access_node, is_buildable, is_valid_structure,
                        make_cell, surface_entry_height, surface_exit_height)
from .terrain import RegionMap

log = logging.getLogger(__name__)

_EPS = 1e-9


class UnsupportedParameters(ParameterError):
    """The +-1.5 bound constants only hold for dz_cliff = L_B / 2."""


def check_ratio(p: SolverParams) -> None:
    if abs(p.dz_cliff - 0.5 * p.L_B) > 1e-12:
        raise UnsupportedParameters(
            f"waterfall bounds require dz_cliff == L_B/2 (got {p.dz_cliff} vs {p.L_B})")


def bound_step(hx_j: int, hn_j: int, ground_j: float, ground_i: float,
               p: SolverParams) -> tuple[int, int]:
    """Height bounds imposed on cell i by its neighbour j, in blocks."""
    check_ratio(p)
    rise = (ground_j - ground_i) / p.L_B
    hx = math.floor(hx_j + rise + 1.5 + _EPS)
    hn = math.ceil(hn_j + rise - 1.5 - _EPS)
    return hx, hn


def end_region(cell, m: RegionMap, top_region: int) -> int | None:
    """Region holding a strict majority of the cell's traversable nodes."""
    lab = m.labels.ravel()[cell.covered]
    trav = m.traversable.ravel()[cell.covered]
    lab = lab[trav]
    if lab.size == 0:
        return None
    values, counts = np.unique(lab, return_counts=True)
    k = int(np.argmax(counts))
    rid = int(values[k])
    if 2 * counts[k] <= lab.size or rid < 0 or rid == top_region:
        return None
    if rid not in set(m.region_ids):
        return None
    return rid


@dataclass
class HeightBounds:
    """Per-cell bounds in blocks from the column-base recurrences (hn <= h <= hx)."""

    hn: list[int] = field(default_factory=list)
    hx: list[int] = field(default_factory=list)


def _ceil_on(a: float, y: float) -> float:
    """Smallest value of the lattice a + Z that is >= y."""
    return a + math.ceil(y - a - _EPS)


def waterfall(c: BuildCandidate, f: HeightField, m: RegionMap, p: SolverParams,
              diag: Counter | None = None, bounds: HeightBounds | None = None) -> Structure | None:
    """Cheapest valid structure marching from ``c.b`` along ``c.u``.

    Levels are tracked in block units per cell as an entry level and an exit
    level on the lattice ``ground/L_B + Z``. A block-carrying cell has
    ``max(entry, exit) = base + 1`` with the two differing by at most one; a
    bare cell sits at its ground. Boundary rules and the two per-cell rules are
    all "not lower than neighbour minus constant", so the forward lower bounds
    combined with the backward ones from the touch-down cell give the least
    (cheapest) feasible assignment.
    """
    check_ratio(p)
    diag = diag if diag is not None else Counter()
    bounds = bounds if bounds is not None else HeightBounds()
    L = p.L_B
    half = p.dz_cliff / L
    cells = [make_cell(c.b, c.u, 0, f, p)]
    if cells[0].ground is None:
        diag["off_map"] += 1
        return None
    a = [cells[0].ground / L]
    f_in, f_out = [a[0]], [a[0]]
    bounds.hx[:] = [0]
    bounds.hn[:] = [0]
    end = None
    # pass 1: march outwards until the structure can touch down in another region
    i = 1
    while end is None:
        if i >= p.max_structure_cells:
            diag["march_cap"] += 1
            return None
        cell = make_cell(c.b, c.u, i, f, p)
        if cell.ground is None:
            diag["off_map"] += 1
            return None
        x, n = bound_step(bounds.hx[-1], max(bounds.hn[-1], 0), cells[-1].ground, cell.ground, p)
        cells.append(cell)
        a.append(cell.ground / L)
        bounds.hx.append(x)
        bounds.hn.append(n)
        if x < 0:
            diag["upper_bound"] += 1
            return None
        if f_out[-1] <= a[i] + half + _EPS:
            rb = end_region(cell, m, c.top_region)
            if rb is not None:
                end = i
                f_in.append(a[i])
                f_out.append(a[i])
                break
            diag["skipped_end"] += 1
        if not is_buildable(cell, f, p):
            diag["unbuildable"] += 1
            return None
        lo_in = max(a[i], _ceil_on(a[i], f_out[-1] - half))
        f_in.append(lo_in)
        f_out.append(max(a[i], _ceil_on(a[i], lo_in - 1)))
        i += 1

    # pass 2: backward lower bounds from the touch-down cell
    lv_in, lv_out = list(f_in), list(f_out)
    g_in = a[end]
    for i in range(end - 1, 0, -1):
        g_out = max(a[i], _ceil_on(a[i], g_in - half))
        g_in = max(a[i], _ceil_on(a[i], g_out - 1))
        lv_in[i] = max(f_in[i], g_in)
        lv_out[i] = max(f_out[i], g_out)
    if _ceil_on(a[0], g_in - half) > a[0] + _EPS:
        diag["start_unreachable"] += 1
        return None

    # pass 3: column heights and surface blocks from the two levels
    h = [0] * (end + 1)
    t = [BlockType.NONE] * (end + 1)
    for i in range(1, end):
        up = int(round(lv_in[i] - a[i]))
        down = int(round(lv_out[i] - a[i]))
        h[i], t[i] = _column(up, down)

    rb = end_region(cells[end], m, c.top_region)
    T = _assemble(c, cells, h, t, m, rb, f)
    if T is None:
        diag["no_access"] += 1
        return None
    if not is_valid_structure(T, f, p):
        diag["invalid"] += 1
        log.warning("waterfall produced an invalid structure at %s", c.b)
        return None
    return T


def _column(entry: int, exit_: int) -> tuple[int, BlockType]:
    """Column height and surface block for entry/exit levels above ground (blocks)."""
    if entry == exit_ == 0:
        return 0, BlockType.NONE
    if entry == exit_:
        return entry - 1, BlockType.BLOCK
    if exit_ == entry + 1:
        return entry, BlockType.WEDGE_F
    if entry == exit_ + 1:
        return exit_, BlockType.WEDGE_B
    raise AssertionError(f"inconsistent levels {entry}/{exit_}")


def _assemble(c, cells, h, t, m: RegionMap, rb: int, f: HeightField) -> Structure | None:
    from .structure import Cell

    final = tuple(Cell(k, cell.corners, h[k], t[k], cell.ground, cell.covered)
                  for k, cell in enumerate(cells))
    acc_a = access_node(final[0], m.labels, c.top_region, f.cell_size)
    acc_b = access_node(final[-1], m.labels, rb, f.cell_size)
    if acc_a < 0 or acc_b < 0:
        return None
    return Structure(tuple(c.b), tuple(c.u), final, c.top_region, rb, -1, acc_a, acc_b)


def brute_force_structure(c: BuildCandidate, f: HeightField, m: RegionMap, p: SolverParams,
                          max_len: int = 8, max_h: int = 6) -> Structure | None:
    """Exhaustive search over end index, heights and terminators (test oracle).

    Only prefixes that already satisfy the boundary rule are extended, which
    keeps the enumeration exact while skipping dead branches.
    """
    if max_len > 8 or max_h > 6:
        raise ParameterError("brute force limited to max_len <= 8, max_h <= 6")
    geo = []
    for i in range(max_len):
        cell = make_cell(c.b, c.u, i, f, p)
        if cell.ground is None:
            break
        geo.append(cell)
    if len(geo) < 2:
        return None
    from .structure import Cell

    options = [(0, BlockType.NONE)] + [(hh, k) for hh in range(max_h + 1)
                                       for k in (BlockType.BLOCK, BlockType.WEDGE_F, BlockType.WEDGE_B)]
    build_ok = [i == 0 or is_buildable(cell, f, p) for i, cell in enumerate(geo)]
    regions = [None] + [end_region(cell, m, c.top_region) for cell in geo[1:]]
    best = None

    def key(cost, hs, ts):
        return (cost, len(hs), hs, [k.value for k in ts])

    def dfs(hs, ts, exit_z, cost):
        nonlocal best
        i = len(hs)
        if i >= len(geo):
            return
        if best is not None and cost > best[0][0]:
            return
        cell = geo[i]
        # close the structure here
        if abs(cell.ground - exit_z) <= p.dz_cliff + _EPS and regions[i] is not None:
            cand_h, cand_t = hs + [0], ts + [BlockType.NONE]
            k = key(cost, cand_h, cand_t)
            if best is None or k < best[0]:
                best = (k, cand_h, cand_t, regions[i])
        if not build_ok[i]:
            return
        for hh, kind in options:
            probe = Cell(i, cell.corners, hh, kind, cell.ground, cell.covered)
            if abs(surface_entry_height(probe, p) - exit_z) > p.dz_cliff + _EPS:
                continue
            step = 0 if kind is BlockType.NONE else hh + 1
            dfs(hs + [hh], ts + [kind], surface_exit_height(probe, p), cost + step)

    dfs([0], [BlockType.NONE], geo[0].ground, 0)
    if best is None:
        return None
    _, hs, ts, rb = best
    T = _assemble(c, geo[:len(hs)], hs, ts, m, rb, f)
    if T is None or not is_valid_structure(T, f, p):
        return None
    return T


def _sweep_one(args):
    c, f, m, p = args
    diag = Counter()
    return waterfall(c, f, m, p, diag), diag


def synthesize_all(candidates, f: HeightField, m: RegionMap, p: SolverParams,
                   threads: int = 1) -> tuple[list[Structure], Counter]:
    """Run waterfall at every candidate; ids follow candidate order."""
    check_ratio(p)
    jobs = [(c, f, m, p) for c in candidates]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_one, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = [_sweep_one(j) for j in jobs]
    structs = []
    diag = Counter()
    for T, d in results:
        diag.update(d)
        if T is not None:
            structs.append(T.with_id(len(structs)))
    return structs, diag
