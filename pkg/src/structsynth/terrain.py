"""Traversable grid graph and region labelling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .config import SolverParams
from .heightfield import HeightField, format_grid_text, steep_field

BLOCKED = -1
PRUNED = -2


@dataclass(frozen=True)
class Region:
    id: int
    size: int
    representative: tuple[int, int]  # (x, y) of the first node in row-major order


@dataclass(frozen=True, eq=False)
class RegionMap:
    """Traversability and region labels over the grid.

    ``labels`` holds a region id per node, ``BLOCKED`` for steep nodes and
    ``PRUNED`` for traversable nodes whose region was dropped as too small.
    ``edge_h[y, x]`` / ``edge_v[y, x]`` flag traversable edges
    (x, y)-(x+1, y) and (x, y)-(x, y+1).
    """

    traversable: np.ndarray
    labels: np.ndarray
    regions: tuple[Region, ...]
    edge_h: np.ndarray
    edge_v: np.ndarray
    cliff_edges: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    @property
    def shape(self):
        return self.labels.shape

    @property
    def region_ids(self) -> list[int]:
        return [r.id for r in self.regions]

    def region_mask(self, rid: int) -> np.ndarray:
        return self.labels == rid

    def label_at(self, x: int, y: int) -> int:
        return int(self.labels[y, x])

    def export_text(self) -> str:
        return format_grid_text(self.labels)


def label_components(mask: np.ndarray, edge_h: np.ndarray, edge_v: np.ndarray):
    """Connected components of ``mask`` using only the flagged grid edges.

    Labels are numbered by first appearance in row-major order; nodes outside
    the mask get -1. Returns ``(count, labels)``.
    """
    h, w = mask.shape
    idx = np.arange(h * w).reshape(h, w)
    eh = edge_h[:, :-1] & mask[:, :-1] & mask[:, 1:]
    ev = edge_v[:-1, :] & mask[:-1, :] & mask[1:, :]
    rows = np.concatenate([idx[:, :-1][eh], idx[:-1, :][ev]])
    cols = np.concatenate([idx[:, 1:][eh], idx[1:, :][ev]])
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(h * w, h * w))
    _, raw = connected_components(graph, directed=False)
    raw = raw.reshape(h, w)
    flat = raw[mask]
    if flat.size == 0:
        return 0, np.full((h, w), -1, dtype=int)
    _, first = np.unique(flat, return_index=True)
    order = np.argsort(first)
    remap = np.full(raw.max() + 1, -1, dtype=int)
    remap[np.unique(flat)[order]] = np.arange(len(order))
    labels = np.full((h, w), -1, dtype=int)
    labels[mask] = remap[flat]
    return len(order), labels


def traversable_edges(f: HeightField, traversable: np.ndarray, p: SolverParams):
    z = f.z
    h, w = z.shape
    edge_h = np.zeros((h, w), dtype=bool)
    edge_v = np.zeros((h, w), dtype=bool)
    edge_h[:, :-1] = np.abs(z[:, 1:] - z[:, :-1]) <= p.dz_cliff
    edge_v[:-1, :] = np.abs(z[1:, :] - z[:-1, :]) <= p.dz_cliff
    both_h = np.zeros_like(edge_h)
    both_v = np.zeros_like(edge_v)
    both_h[:, :-1] = traversable[:, :-1] & traversable[:, 1:]
    both_v[:-1, :] = traversable[:-1, :] & traversable[1:, :]
    cliffs = []
    for y, x in zip(*np.nonzero(both_h[:, :-1] & ~edge_h[:, :-1])):
        cliffs.append(((int(x), int(y)), (int(x) + 1, int(y))))
    for y, x in zip(*np.nonzero(both_v[:-1, :] & ~edge_v[:-1, :])):
        cliffs.append(((int(x), int(y)), (int(x), int(y) + 1)))
    cliffs.sort(key=lambda e: (e[0][1], e[0][0], e[1][1], e[1][0]))
    return edge_h & both_h, edge_v & both_v, tuple(cliffs)


def build_region_map(f: HeightField, p: SolverParams) -> RegionMap:
    traversable = steep_field(f, p) <= p.k_steep
    edge_h, edge_v, cliffs = traversable_edges(f, traversable, p)
    count, comp = label_components(traversable, edge_h, edge_v)
    labels = np.where(traversable, comp, BLOCKED)
    regions = []
    for rid in range(count):
        ys, xs = np.nonzero(labels == rid)
        regions.append(Region(rid, len(ys), (int(xs[0]), int(ys[0]))))
    for arr in (traversable, labels, edge_h, edge_v):
        arr.setflags(write=False)
    return RegionMap(traversable, labels, tuple(regions), edge_h, edge_v, cliffs)


def fits_square(mask: np.ndarray, side: int) -> bool:
    """True iff an axis-aligned ``side`` x ``side`` block of nodes lies inside ``mask``."""
    h, w = mask.shape
    if side > h or side > w:
        return False
    if side <= 1:
        return bool(mask.any())
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    integral[1:, 1:] = np.cumsum(np.cumsum(mask, axis=0), axis=1)
    sums = (integral[side:, side:] - integral[:-side, side:]
            - integral[side:, :-side] + integral[:-side, :-side])
    return bool((sums == side * side).any())


def square_side_nodes(min_region_side: float, cell_size: float) -> int:
    return max(1, math.ceil(min_region_side / cell_size - 1e-9))


def prune_small_regions(m: RegionMap, p: SolverParams, cell_size: float = 1.0) -> RegionMap:
    """Drop regions that cannot hold a ``min_region_side`` square."""
    side = square_side_nodes(p.min_region_side, cell_size)
    labels = m.labels.copy()
    kept = []
    for region in m.regions:
        mask = labels == region.id
        ys, xs = np.nonzero(mask)
        sub = mask[ys.min():ys.max() + 1, xs.min():xs.max() + 1]
        if fits_square(sub, side):
            kept.append(region)
        else:
            labels[mask] = PRUNED
    labels.setflags(write=False)
    return replace(m, labels=labels, regions=tuple(kept))
