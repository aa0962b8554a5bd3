"""Structure geometry: oriented cells, block surfaces, validity and cost."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ParameterError, SolverParams
from .heightfield import HeightField

TOL = 1e-9


class UndefinedGround(ValueError):
    """A cell covers no grid node, so its ground height is undefined."""


class BlockType(str, enum.Enum):
    BLOCK = "block"
    WEDGE_F = "wedge_f"
    WEDGE_B = "wedge_b"
    NONE = "none"

    def surface(self, x: float, L_B: float) -> float:
        if self is BlockType.BLOCK:
            return L_B
        if self is BlockType.WEDGE_F:
            return x
        if self is BlockType.WEDGE_B:
            return L_B - x
        raise ValueError("end cells carry no surface block")


# ------------------------------------------------------------ geometry

def normal_of(u) -> np.ndarray:
    return np.array([-u[1], u[0]], dtype=float)


def cell_footprint(b, u, i: int, L_B: float = 8.0) -> np.ndarray:
    """Corners (4x2, cm) of cell ``i``; cell 0 lies behind ``b``, cells 1.. ahead."""
    b = np.asarray(b, dtype=float)
    u = np.asarray(u, dtype=float)
    if abs(math.hypot(u[0], u[1]) - 1.0) > 1e-9:
        raise ParameterError("orientation must be a unit vector")
    lo = (i - 1) if i >= 1 else -1
    start = b + lo * L_B * u
    end = start + L_B * u
    off = 0.5 * L_B * normal_of(u)
    return np.array([start - off, end - off, end + off, start + off])


def covered_nodes(corners: np.ndarray, shape: tuple[int, int], cell_size: float = 1.0) -> np.ndarray:
    """Flat indices (row-major) of grid nodes inside or on the square ``corners``."""
    corners = np.asarray(corners, dtype=float)
    h, w = shape
    lo = corners.min(axis=0) / cell_size
    hi = corners.max(axis=0) / cell_size
    x0, y0 = max(0, math.ceil(lo[0] - TOL)), max(0, math.ceil(lo[1] - TOL))
    x1, y1 = min(w - 1, math.floor(hi[0] + TOL)), min(h - 1, math.floor(hi[1] + TOL))
    if x0 > x1 or y0 > y1:
        return np.empty(0, dtype=np.int64)
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1) * cell_size
    origin = corners[0]
    ax = corners[1] - corners[0]
    ay = corners[3] - corners[0]
    rel = pts - origin
    s = rel @ ax / (ax @ ax)
    t = rel @ ay / (ay @ ay)
    eps_s = TOL / math.sqrt(ax @ ax)
    eps_t = TOL / math.sqrt(ay @ ay)
    inside = (s >= -eps_s) & (s <= 1 + eps_s) & (t >= -eps_t) & (t <= 1 + eps_t)
    return (ys.ravel()[inside] * w + xs.ravel()[inside]).astype(np.int64)


def lower_median(values) -> float:
    vals = np.sort(np.asarray(values, dtype=float).ravel())
    if vals.size == 0:
        raise UndefinedGround("cell covers no grid node")
    return float(vals[(vals.size - 1) // 2])


# ---------------------------------------------------------------- cells

@dataclass(frozen=True, eq=False)
class Cell:
    index: int
    corners: np.ndarray
    h: int
    t: BlockType
    ground: float | None
    covered: np.ndarray = field(repr=False)

    @property
    def center(self) -> np.ndarray:
        return self.corners.mean(axis=0)


def make_cell(b, u, i: int, f: HeightField, p: SolverParams,
              h: int = 0, t: BlockType = BlockType.NONE) -> Cell:
    corners = cell_footprint(b, u, i, p.L_B)
    cov = covered_nodes(corners, f.shape, f.cell_size)
    ground = lower_median(f.z.ravel()[cov]) if cov.size else None
    return Cell(i, corners, int(h), BlockType(t), ground, cov)


def cell_ground(cell: Cell, f: HeightField) -> float:
    return lower_median(f.z.ravel()[cell.covered])


def is_buildable(cell: Cell, f: HeightField, p: SolverParams) -> bool:
    if cell.covered.size == 0:
        return False
    heights = f.z.ravel()[cell.covered]
    return bool(np.all(heights - lower_median(heights) < p.alpha * p.L_B))


def surface_exit_height(cell: Cell, p: SolverParams) -> float:
    if cell.t is BlockType.NONE:
        return cell.ground
    return cell.ground + cell.h * p.L_B + cell.t.surface(p.L_B, p.L_B)


def surface_entry_height(cell: Cell, p: SolverParams) -> float:
    if cell.t is BlockType.NONE:
        return cell.ground
    return cell.ground + cell.h * p.L_B + cell.t.surface(0.0, p.L_B)


# ----------------------------------------------------------- structures

@dataclass(frozen=True, eq=False)
class Structure:
    b: tuple[float, float]
    u: tuple[float, float]
    cells: tuple[Cell, ...]
    region_a: int
    region_b: int
    id: int = -1
    access_a: int = -1
    access_b: int = -1

    @property
    def heights(self) -> list[int]:
        return [c.h for c in self.cells]

    @property
    def types(self) -> list[BlockType]:
        return [c.t for c in self.cells]

    @property
    def cost_paper(self) -> int:
        """Column blocks only (sum of h), terminators excluded."""
        return structure_cost(self)[1]

    @property
    def cost_blocks(self) -> int:
        """Every block placed, terminators included; the optimisation objective."""
        return structure_cost(self)[0]

    @property
    def blocking(self) -> np.ndarray:
        """Nodes under block-carrying cells; bare end pads stay drivable ground."""
        parts = [c.covered for c in self.cells if c.t is not BlockType.NONE]
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(parts))

    def with_id(self, sid: int) -> "Structure":
        return Structure(self.b, self.u, self.cells, self.region_a, self.region_b,
                         sid, self.access_a, self.access_b)


def structure_cost(T: Structure) -> tuple[int, int]:
    columns = sum(c.h for c in T.cells)
    blocks = columns + sum(1 for c in T.cells if c.t is not BlockType.NONE)
    return blocks, columns


def access_node(cell: Cell, labels: np.ndarray, rid: int, cell_size: float = 1.0) -> int:
    """Node of region ``rid`` under ``cell`` closest to its centre, or -1."""
    cov = cell.covered
    if cov.size == 0:
        return -1
    lab = labels.ravel()[cov]
    cand = cov[lab == rid]
    if cand.size == 0:
        return -1
    w = labels.shape[1]
    pts = np.stack([cand % w, cand // w], axis=1) * cell_size
    d2 = np.sum((pts - cell.center) ** 2, axis=1)
    best = np.flatnonzero(d2 <= d2.min() + 1e-9)
    return int(cand[best].min())


def build_structure(b, u, heights, types, f: HeightField, p: SolverParams,
                    region_a: int, region_b: int, labels: np.ndarray | None = None,
                    sid: int = -1) -> Structure:
    cells = tuple(make_cell(b, u, i, f, p, h, t) for i, (h, t) in enumerate(zip(heights, types)))
    acc_a = acc_b = -1
    if labels is not None:
        acc_a = access_node(cells[0], labels, region_a, f.cell_size)
        acc_b = access_node(cells[-1], labels, region_b, f.cell_size)
    return Structure((float(b[0]), float(b[1])), (float(u[0]), float(u[1])), cells,
                     region_a, region_b, sid, acc_a, acc_b)


def is_valid_structure(T: Structure, f: HeightField, p: SolverParams) -> bool:
    cells = T.cells
    if len(cells) < 2:
        return False
    for end in (cells[0], cells[-1]):
        if end.h != 0 or end.t is not BlockType.NONE or end.ground is None:
            return False
    for c in cells[1:-1]:
        # an interior cell without a surface block is bare ground
        if c.h < 0 or (c.t is BlockType.NONE and c.h != 0) or not is_buildable(c, f, p):
            return False
    for a, nxt in zip(cells, cells[1:]):
        if abs(surface_entry_height(nxt, p) - surface_exit_height(a, p)) > p.dz_cliff + TOL:
            return False
    return True
