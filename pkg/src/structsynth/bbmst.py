"""Branch and bound over conflict-free spanning sets of structures.

The search state is a refined region labelling plus the sets of excluded and
forced structures. Each state is relaxed to a Kruskal tree over the current
regions (forced structures taken first). Pair conflicts branch on which
structure to drop; a region cut by the tree's footprint branches on dropping
one of the cutting structures or on accepting the cut. Accepting it replaces
the region by its surviving pieces and forces the cutting structures, since
the pieces only exist while those structures stand.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import SolverParams
from .conflict import (ConflictIndex, Edge, RegionGraph, build_conflict_index, cells_intersect,
                       region_structure_conflict)
from .heightfield import HeightField
from .structure import Structure
from .terrain import RegionMap, label_components

log = logging.getLogger(__name__)

INF = math.inf


@dataclass
class SolutionTree:
    chosen: list[int] = field(default_factory=list)
    total_cost: float = INF
    feasible: bool = False
    spanning: bool = False
    region_splits: list[tuple[int, list[int]]] = field(default_factory=list)


@dataclass
class SearchStats:
    branches_explored: int = 0
    kruskal_calls: int = 0
    incumbent_updates: int = 0
    timed_out: bool = False
    wall_time: float = 0.0
    bound_violations: int = 0
    node_check_failures: int = 0
    dropped_endpoints: int = 0
    pair_branches: int = 0
    region_branches: int = 0
    incumbent_costs: list[float] = field(default_factory=list)


# ------------------------------------------------------------ kruskal

class _DisjointSet:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def kruskal(g: RegionGraph, forced=()) -> list[Edge] | None:
    """Cheapest connected spanning edge set containing ``forced`` (ids).

    Without forced edges this is the minimum spanning tree with ties broken by
    structure id. Returns ``None`` when the graph cannot be spanned.
    """
    ds = _DisjointSet(g.nodes)
    forced = set(forced)
    tree = []
    for e in sorted((e for e in g.edges if e.sid in forced), key=lambda e: e.sid):
        ds.union(e.a, e.b)
        tree.append(e)
    for e in sorted((e for e in g.edges if e.sid not in forced), key=lambda e: (e.weight, e.sid)):
        if ds.union(e.a, e.b):
            tree.append(e)
    roots = {ds.find(n) for n in g.nodes}
    if len(roots) > 1:
        return None
    return tree


def tree_cost(tree) -> int:
    return sum(e.weight for e in tree)


# -------------------------------------------------------------- state

@dataclass
class _State:
    labels: np.ndarray          # current region id per node (refined by splits)
    regions: tuple[int, ...]
    attach: dict                # sid -> (region, region) under the current labelling
    excluded: frozenset
    forced: frozenset
    splits: tuple
    next_id: int
    bound: float                # relaxed cost at the parent


def _graph(state: _State, weights: dict) -> RegionGraph:
    g = RegionGraph(list(state.regions))
    for sid in sorted(state.attach):
        if sid in state.excluded:
            continue
        ra, rb = state.attach[sid]
        g.edges.append(Edge(sid, ra, rb, weights[sid]))
    return g


def _split(state: _State, r: int, cutters: list[int], comps, by_id, bound: float) -> _State:
    """Replace region ``r`` by its surviving pieces and re-attach structure ends."""
    labels = state.labels.copy()
    flat = labels.ravel()
    flat[flat == r] = -3  # consumed by the cutting footprint
    new_ids = []
    nid = state.next_id
    for comp in comps:
        flat[comp] = nid
        new_ids.append(nid)
        nid += 1
    excluded = set(state.excluded)
    attach = {}
    for sid, (ra, rb) in state.attach.items():
        if sid in excluded:
            continue
        ends = []
        for reg, acc in ((ra, by_id[sid].access_a), (rb, by_id[sid].access_b)):
            ends.append(int(flat[acc]) if reg == r else reg)
        if -3 in ends:
            excluded.add(sid)
            continue
        if ends[0] == ends[1]:
            # both ends now in one piece: the structure links nothing
            excluded.add(sid)
            continue
        attach[sid] = tuple(ends)
    regions = tuple(sorted([x for x in state.regions if x != r] + new_ids))
    return _State(labels, regions, attach, frozenset(excluded), state.forced | frozenset(cutters),
                  state.splits + ((r, tuple(new_ids)),), nid, bound)


def _with_forced(state: _State, keep, conflicts: ConflictIndex) -> _State:
    """Force ``keep`` and exclude everything that conflicts with a forced structure."""
    forced = state.forced | frozenset(keep)
    excluded = set(state.excluded)
    for sid in keep:
        excluded.update(conflicts.partners(sid))
    return _State(state.labels, state.regions, state.attach, frozenset(excluded), forced,
                  state.splits, state.next_id, state.bound)


def _partition(state: _State, cands, conflicts: ConflictIndex, bound: float) -> list[_State]:
    """Children that drop ``cands[k]`` while keeping ``cands[:k]``; disjoint by construction."""
    out = []
    kept = []
    for sid in cands:
        if sid not in state.forced:
            child = _State(state.labels, state.regions, state.attach, state.excluded | {sid},
                           state.forced, state.splits, state.next_id, bound)
            child = _with_forced(child, kept, conflicts)
            if not child.forced & child.excluded:
                out.append(child)
        kept.append(sid)
    return out


def _pair_conflict(tree_ids, conflicts: ConflictIndex):
    for a, b in itertools.combinations(sorted(tree_ids), 2):
        if conflicts.conflicts(a, b):
            return a, b
    return None


def _region_conflict(state: _State, tree_ids, by_id, m: RegionMap):
    """Lowest region cut by the tree footprint or losing an attached endpoint."""
    chosen = [by_id[s] for s in sorted(tree_ids)]
    flat = state.labels.ravel()
    occ = np.zeros(flat.shape, dtype=bool)
    for s in chosen:
        occ[s.blocking] = True
    for r in state.regions:
        hit = region_structure_conflict(r, chosen, m, state.labels)
        if hit is not None:
            return r, hit[0], hit[1]
        # an endpoint access node swallowed without cutting the region
        for s in chosen:
            ra, rb = state.attach[s.id]
            for reg, acc in ((ra, s.access_a), (rb, s.access_b)):
                if reg == r and occ[acc]:
                    touching = sorted(t.id for t in chosen if t.blocking.size
                                      and (flat[t.blocking] == r).any())
                    mask = (state.labels == r) & ~occ.reshape(state.labels.shape)
                    n, comp = label_components(mask, m.edge_h, m.edge_v)
                    comps = [np.flatnonzero(comp.ravel() == k) for k in range(n)]
                    return r, touching, comps
    return None


def bbmst(regions, structs: list[Structure], conflicts: ConflictIndex | None, m: RegionMap,
          p: SolverParams, f: HeightField | None = None, timeout: float | None = None,
          check_nodes: bool = True) -> tuple[SolutionTree, SearchStats]:
    """Minimum-cost conflict-free set of structures making all regions reachable."""
    t0 = time.perf_counter()
    timeout = p.timeout if timeout is None else timeout
    conflicts = conflicts if conflicts is not None else build_conflict_index(structs)
    stats = SearchStats()
    by_id = {s.id: s for s in structs}
    region_ids = sorted(r.id if hasattr(r, "id") else int(r) for r in regions)
    known = set(region_ids)
    attach = {s.id: (s.region_a, s.region_b) for s in structs
              if s.region_a in known and s.region_b in known and s.region_a != s.region_b
              and s.access_a >= 0 and s.access_b >= 0}
    weights = {s.id: s.cost_blocks for s in structs}
    labels = np.where(np.isin(m.labels, region_ids), m.labels, -1)
    root = _State(labels, tuple(region_ids), attach, frozenset(), frozenset(), (),
                  (max(region_ids) + 1) if region_ids else 0, 0.0)

    best = SolutionTree()
    stack = [root]
    while stack:
        if time.perf_counter() - t0 > timeout:
            stats.timed_out = True
            break
        state = stack.pop()
        stats.branches_explored += 1
        g = _graph(state, weights)
        stats.kruskal_calls += 1
        tree = kruskal(g, state.forced)
        if tree is None:
            continue
        cost = tree_cost(tree)
        if cost < state.bound:
            stats.bound_violations += 1
        if cost >= best.total_cost:
            continue
        ids = [e.sid for e in tree]

        pair = _pair_conflict(ids, conflicts)
        if pair is not None:
            stats.pair_branches += 1
            children = _partition(state, list(pair), conflicts, cost)
            stack.extend(reversed(children))
            continue

        hit = _region_conflict(state, ids, by_id, m)
        if hit is not None:
            r, cutters, comps = hit
            stats.region_branches += 1
            children = _partition(state, cutters, conflicts, cost)
            split = _split(state, r, cutters, comps, by_id, cost)
            split = _with_forced(split, cutters, conflicts)
            stats.dropped_endpoints += len(split.excluded) - len(state.excluded)
            # a cutter that lost an endpoint is dead weight; dropping it is an earlier child
            if not split.forced & split.excluded:
                children.append(split)
            stack.extend(reversed(children))
            continue

        chosen = [by_id[i] for i in sorted(ids)]
        if check_nodes and f is not None:
            spanning, free = validate_solution(chosen, f, m, p)
            if not (spanning and free):
                stats.node_check_failures += 1
                log.warning("symbolically valid set failed the node-level check")
                continue
        best = SolutionTree(sorted(ids), float(cost), True, True,
                            [(int(r), list(sub)) for r, sub in state.splits])
        stats.incumbent_updates += 1
        stats.incumbent_costs.append(float(cost))

    stats.wall_time = time.perf_counter() - t0
    return best, stats


# ----------------------------------------------------------- checking

def validate_solution(chosen: list[Structure], f: HeightField, m: RegionMap,
                      p: SolverParams) -> tuple[bool, bool]:
    """Node-level check: (all regions mutually reachable, no overlapping cells)."""
    free = True
    for s, t in itertools.combinations(chosen, 2):
        if any(cells_intersect(a, b) for a in s.cells for b in t.cells):
            free = False
            break
    keep = set(m.region_ids)
    alive = np.isin(m.labels, list(keep)) if keep else np.zeros(m.shape, dtype=bool)
    flat = alive.ravel()
    for s in chosen:
        flat[s.blocking] = False
    alive = flat.reshape(m.shape)
    n, comp = label_components(alive, m.edge_h, m.edge_v)
    if n <= 1:
        return True, free
    ds = _DisjointSet(range(n))
    cflat = comp.ravel()
    for s in chosen:
        if s.access_a >= 0 and s.access_b >= 0 and flat[s.access_a] and flat[s.access_b]:
            ds.union(int(cflat[s.access_a]), int(cflat[s.access_b]))
    return len({ds.find(k) for k in range(n)}) == 1, free


def brute_force_spanning(regions, structs: list[Structure], f: HeightField, m: RegionMap,
                         p: SolverParams, max_subset: int | None = None) -> SolutionTree:
    """Cheapest subset passing ``validate_solution`` (exhaustive oracle, <= 16 structures)."""
    if len(structs) > 16:
        raise ValueError("brute force limited to 16 structures")
    max_subset = len(structs) if max_subset is None else max_subset
    conflicts = build_conflict_index(structs, prefilter=False)
    subsets = []
    for k in range(max_subset + 1):
        for combo in itertools.combinations(range(len(structs)), k):
            cost = sum(structs[i].cost_blocks for i in combo)
            subsets.append((cost, k, combo))
    subsets.sort()
    for cost, _, combo in subsets:
        ids = [structs[i].id for i in combo]
        if any(conflicts.conflicts(a, b) for a, b in itertools.combinations(ids, 2)):
            continue
        spanning, free = validate_solution([structs[i] for i in combo], f, m, p)
        if spanning and free:
            return SolutionTree(sorted(ids), float(cost), True, True, [])
    return SolutionTree()
