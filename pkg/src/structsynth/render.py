"""Top-down raster of a solved map as a binary pixmap."""

from __future__ import annotations

import colorsys
from pathlib import Path

import numpy as np

from .heightfield import HeightField
from .pnm import write_ppm
from .structure import Structure
from .terrain import RegionMap

STRUCTURE_RGB = (0, 0, 255)
BUILD_POINT_RGB = (255, 0, 0)


def _region_hue(rid: int) -> tuple[float, float, float]:
    # golden-ratio hue walk keeps neighbouring ids apart
    return colorsys.hsv_to_rgb((rid * 0.618033988749895) % 1.0, 0.55, 1.0)


def raster(f: HeightField, m: RegionMap | None = None, structures: list[Structure] = (),
           build_points=()) -> np.ndarray:
    """RGB image (height x width x 3, uint8); one pixel per grid node."""
    z = f.z
    span = float(z.max() - z.min())
    gray = (z - z.min()) / span if span > 0 else np.full(z.shape, 0.5)
    img = np.repeat(gray[..., None], 3, axis=2) * 0.8 + 0.2
    if m is not None:
        for r in m.regions:
            mask = m.labels == r.id
            img[mask] *= np.array(_region_hue(r.id))
    out = np.clip(np.round(img * 255), 0, 255).astype(np.uint8)
    h, w = z.shape
    cs = f.cell_size
    for b in build_points:
        x, y = int(round(b[0] / cs)), int(round(b[1] / cs))
        if 0 <= x < w and 0 <= y < h:
            out[y, x] = BUILD_POINT_RGB
    flat = out.reshape(-1, 3)
    for s in structures:
        for c in s.cells:
            flat[c.covered] = STRUCTURE_RGB
    return out


def render(f: HeightField, m: RegionMap | None, structures: list[Structure], path,
           build_points=()) -> None:
    Path(path).write_bytes(write_ppm(raster(f, m, structures, build_points)))
