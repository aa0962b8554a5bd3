"""Candidate build points on cliff edges and their orientation estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SolverParams
from .heightfield import HeightField
from .terrain import RegionMap


@dataclass(frozen=True)
class BuildCandidate:
    b: tuple[float, float]
    u: tuple[float, float]
    top_region: int
    flatness_error: float


def estimate_normal(b, top_region: int, m: RegionMap, f: HeightField, p: SolverParams):
    """Fit a centroid-difference linear separator around ``b``.

    Nodes within ``L_B`` of ``b`` are split into the top region and the rest.
    Returns ``(u, error)`` with ``u`` pointing away from the top region, or
    ``None`` when a class is too small or the error exceeds the reject rate.
    """
    cs = f.cell_size
    h, w = m.shape
    bx, by = b
    r = p.L_B
    x0, x1 = max(0, math.ceil((bx - r) / cs)), min(w - 1, math.floor((bx + r) / cs))
    y0, y1 = max(0, math.ceil((by - r) / cs)), min(h - 1, math.floor((by + r) / cs))
    if x0 > x1 or y0 > y1:
        return None
    ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    px, py = xs.ravel() * cs, ys.ravel() * cs
    near = (px - bx) ** 2 + (py - by) ** 2 <= r * r + 1e-9
    pts = np.stack([px[near], py[near]], axis=1)
    is_top = m.labels[ys.ravel()[near], xs.ravel()[near]] == top_region
    if is_top.sum() < 2 or (~is_top).sum() < 2:
        return None
    c_top = pts[is_top].mean(axis=0)
    c_other = pts[~is_top].mean(axis=0)
    d = c_other - c_top
    norm = math.hypot(d[0], d[1])
    if norm < 1e-12:
        return None
    u = d / norm
    proj = pts @ u
    thresh = 0.5 * (proj[is_top].mean() + proj[~is_top].mean())
    wrong = np.count_nonzero(proj[is_top] > thresh) + np.count_nonzero(proj[~is_top] < thresh)
    error = wrong / len(pts)
    if error > p.normal_reject_rate:
        return None
    return (float(u[0]), float(u[1])), float(error)


def extract_build_points(m: RegionMap, f: HeightField, p: SolverParams) -> list[BuildCandidate]:
    cs = f.cell_size
    valid = set(m.region_ids)
    z = f.z
    out = []
    seen = set()
    for (xa, ya), (xb, yb) in m.cliff_edges:
        if z[ya, xa] >= z[yb, xb]:
            hi = (xa, ya)
        else:
            hi = (xb, yb)
        top = int(m.labels[hi[1], hi[0]])
        if top not in valid:
            continue
        b = (0.5 * (xa + xb) * cs, 0.5 * (ya + yb) * cs)
        key = (round(b[0] / 1e-6), round(b[1] / 1e-6))
        if key in seen:
            continue
        seen.add(key)
        est = estimate_normal(b, top, m, f, p)
        if est is None:
            continue
        u, err = est
        out.append(BuildCandidate(b, u, top, err))
    return out
