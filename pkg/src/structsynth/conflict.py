"""Structure-structure and region-structure conflicts, and the region multigraph."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .structure import Cell, Structure
from .terrain import RegionMap, label_components

log = logging.getLogger(__name__)

_EPS = 1e-9


# ------------------------------------------------------------ cells

def _axes(corners: np.ndarray) -> list[np.ndarray]:
    out = []
    for k in range(2):
        e = corners[k + 1] - corners[k]
        out.append(np.array([-e[1], e[0]]) / math.hypot(e[0], e[1]))
    return out


def cells_intersect(a, b, eps: float = _EPS) -> bool:
    """Positive-area overlap of two convex squares (separating axis test).

    Accepts ``Cell`` objects or raw 4x2 corner arrays. Touching along an edge
    or at a corner is not an intersection.
    """
    ca = np.asarray(a.corners if isinstance(a, Cell) else a, dtype=float)
    cb = np.asarray(b.corners if isinstance(b, Cell) else b, dtype=float)
    for axis in _axes(ca) + _axes(cb):
        pa, pb = ca @ axis, cb @ axis
        if min(pa.max(), pb.max()) - max(pa.min(), pb.min()) <= eps:
            return False
    return True


def structures_conflict(s: Structure, t: Structure) -> bool:
    return any(cells_intersect(a, b) for a in s.cells for b in t.cells)


# ------------------------------------------------------------ index

@dataclass(frozen=True)
class ConflictIndex:
    pair_conflicts: frozenset[tuple[int, int]]
    n_structures: int
    _partners: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        partners = defaultdict(set)
        for a, b in self.pair_conflicts:
            partners[a].add(b)
            partners[b].add(a)
        object.__setattr__(self, "_partners", {k: sorted(v) for k, v in partners.items()})

    @property
    def cpf(self) -> float:
        n = self.n_structures
        if n < 2:
            return 0.0
        return len(self.pair_conflicts) / (n * (n - 1) / 2)

    def conflicts(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.pair_conflicts

    def partners(self, i: int) -> list[int]:
        return self._partners.get(i, [])


def _bucket_pairs(structs: list[Structure], bucket: float):
    """Structure pairs whose cell bounding boxes share a grid bucket."""
    grid = defaultdict(set)
    for k, s in enumerate(structs):
        for c in s.cells:
            lo = np.floor(c.corners.min(axis=0) / bucket).astype(int)
            hi = np.floor(c.corners.max(axis=0) / bucket).astype(int)
            for gx in range(lo[0], hi[0] + 1):
                for gy in range(lo[1], hi[1] + 1):
                    grid[gx, gy].add(k)
    pairs = set()
    for members in grid.values():
        for a, b in combinations(sorted(members), 2):
            pairs.add((a, b))
    return sorted(pairs)


def build_conflict_index(structs: list[Structure], prefilter: bool = True,
                         bucket: float | None = None) -> ConflictIndex:
    """All conflicting structure pairs, keyed by structure id."""
    if prefilter and structs:
        size = bucket or max(float(np.ptp(structs[0].cells[0].corners[:, 0])), 1.0) * 2
        pairs = _bucket_pairs(structs, size)
    else:
        pairs = list(combinations(range(len(structs)), 2))
    found = set()
    for a, b in pairs:
        if structures_conflict(structs[a], structs[b]):
            i, j = structs[a].id, structs[b].id
            found.add((min(i, j), max(i, j)))
    return ConflictIndex(frozenset(found), len(structs))


# -------------------------------------------------------- regions

def region_structure_conflict(r: int, structs: list[Structure], m: RegionMap,
                              labels: np.ndarray | None = None):
    """Split test for region ``r`` under the blocking footprint of ``structs``.

    ``labels`` overrides ``m.labels`` so callers can pass a refined labelling.
    Returns ``None`` when the remainder of ``r`` stays in one piece, otherwise
    ``(ids, components)`` with the ids of the structures that touch ``r`` and
    the surviving node sets (flat indices), ordered by smallest node.
    """
    labels = m.labels if labels is None else labels
    mask = (labels == r).ravel()
    touching = []
    occ = np.zeros_like(mask)
    for s in structs:
        nodes = s.blocking
        if nodes.size and mask[nodes].any():
            touching.append(s.id)
            occ[nodes] = True
    if not touching:
        return None
    rest = (mask & ~occ).reshape(labels.shape)
    count, comp = label_components(rest, m.edge_h, m.edge_v)
    if count == 1:
        return None
    flat = comp.ravel()
    comps = [np.flatnonzero(flat == k) for k in range(count)]
    return sorted(touching), comps


# ---------------------------------------------------------- graph

@dataclass(frozen=True)
class Edge:
    sid: int
    a: int
    b: int
    weight: int


@dataclass
class RegionGraph:
    nodes: list[int]
    edges: list[Edge] = field(default_factory=list)
    dropped: list[int] = field(default_factory=list)


def build_region_graph(regions, structs: list[Structure]) -> RegionGraph:
    """Regions as nodes and structures as weighted parallel edges."""
    ids = sorted(r.id if hasattr(r, "id") else int(r) for r in regions)
    known = set(ids)
    g = RegionGraph(ids)
    for s in structs:
        if s.region_a in known and s.region_b in known:
            g.edges.append(Edge(s.id, s.region_a, s.region_b, s.cost_blocks))
        else:
            log.info("structure %d dropped: endpoint region missing", s.id)
            g.dropped.append(s.id)
    return g
