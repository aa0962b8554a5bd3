"""Height-field container, map I/O, preprocessing filters and slope fields.

Grid node ``(x, y)`` sits at planar position ``(x * cell_size, y * cell_size)``
in cm; row 0 is the top row of the source document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .config import ParameterError, SolverParams
from .pnm import FormatError, read_pnm


@dataclass(frozen=True, eq=False)
class HeightField:
    z: np.ndarray
    cell_size: float = 1.0

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        if z.ndim != 2 or z.shape[0] < 1 or z.shape[1] < 1:
            raise FormatError("height field must be a non-empty 2-D grid")
        if not np.all(np.isfinite(z)) or np.any(z < 0):
            raise FormatError("heights must be finite and non-negative")
        if not self.cell_size > 0:
            raise ParameterError("cell_size must be positive")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def width(self) -> int:
        return self.z.shape[1]

    @property
    def height(self) -> int:
        return self.z.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.z.shape

    def at(self, x: int, y: int) -> float:
        return float(self.z[y, x])

    def with_z(self, z) -> "HeightField":
        return HeightField(z, self.cell_size)

    def __eq__(self, other):
        if not isinstance(other, HeightField):
            return NotImplemented
        return self.cell_size == other.cell_size and np.array_equal(self.z, other.z)


# ---------------------------------------------------------------- I/O

def _format_number(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def parse_grid_text(text: str, z_scale: float = 1.0, cell_size: float | None = None) -> HeightField:
    """Parse the comma-separated text grid format."""
    header_cell = None
    rows = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("cell_size="):
                try:
                    header_cell = float(body.split("=", 1)[1])
                except ValueError as exc:
                    raise FormatError("bad cell_size header") from exc
            continue
        try:
            rows.append([float(tok) for tok in stripped.split(",")])
        except ValueError as exc:
            raise FormatError(f"non-numeric entry in row {len(rows)}") from exc
    if not rows:
        raise FormatError("empty grid")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FormatError("ragged rows")
    size = cell_size if cell_size is not None else (header_cell or 1.0)
    return HeightField(np.array(rows) * z_scale, size)


def format_grid_text(values: np.ndarray, cell_size: float | None = None) -> str:
    lines = []
    if cell_size is not None:
        lines.append(f"# cell_size={_format_number(cell_size)}")
    for row in np.asarray(values):
        lines.append(",".join(_format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def load_height_field(source, cell_size: float | None = None, z_scale: float = 1.0) -> HeightField:
    """Load a text grid or a PGM image; ``source`` is a path or raw bytes/str.

    Image intensities are multiplied by ``z_scale`` to get cm.
    """
    if isinstance(source, (str, Path)) and not (isinstance(source, str) and "\n" in source):
        data = Path(source).read_bytes()
    elif isinstance(source, str):
        data = source.encode()
    else:
        data = bytes(source)
    if data[:2] in (b"P2", b"P5"):
        pixels = read_pnm(data)
        return HeightField(pixels.astype(float) * z_scale, cell_size or 1.0)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("unrecognised map document") from exc
    return parse_grid_text(text, z_scale=z_scale, cell_size=cell_size)


def save_height_field(f: HeightField, path) -> None:
    Path(path).write_text(format_grid_text(f.z, f.cell_size))


# ------------------------------------------------------- preprocessing

def median_filter(f: HeightField, window: int = 3) -> HeightField:
    """Median over the window clipped to the grid (even counts average the middle pair)."""
    if window < 1 or window % 2 == 0:
        raise ParameterError("median window must be odd and >= 1")
    if window == 1:
        return f
    r = window // 2
    padded = np.pad(f.z, r, mode="constant", constant_values=np.nan)
    windows = sliding_window_view(padded, (window, window))
    return f.with_z(np.nanmedian(windows, axis=(-2, -1)))


def kmeans_1d(values: np.ndarray, k: int, max_rounds: int = 100) -> np.ndarray:
    """Lloyd iterations on scalars with centroids seeded at evenly spaced quantiles.

    Returns the centroid assigned to each input value.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    values = np.asarray(values, dtype=float)
    uniq, inverse, counts = np.unique(values.ravel(), return_inverse=True, return_counts=True)
    if len(uniq) <= k:
        return values.copy()
    # quantiles of the full multiset, not of the distinct values
    centroids = np.quantile(values.ravel(), (np.arange(k) + 0.5) / k)
    assign = None
    for _ in range(max_rounds):
        dist = np.abs(uniq[:, None] - centroids[None, :])
        new_assign = np.argmin(dist, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            sel = assign == j
            if sel.any():
                centroids[j] = np.sum(uniq[sel] * counts[sel]) / counts[sel].sum()
    return centroids[assign][inverse].reshape(values.shape)


def quantize_levels(f: HeightField, k: int) -> HeightField:
    return f.with_z(kmeans_1d(f.z, k))


# ------------------------------------------------------ slope fields

def gradient_magnitude(f: HeightField) -> np.ndarray:
    """|grad z| in cm/cm: central differences inside, one-sided at borders."""
    z = f.z
    gy = np.gradient(z, f.cell_size, axis=0) if z.shape[0] > 1 else np.zeros_like(z)
    gx = np.gradient(z, f.cell_size, axis=1) if z.shape[1] > 1 else np.zeros_like(z)
    return np.hypot(gx, gy)


def cliff_field(f: HeightField, p: SolverParams) -> np.ndarray:
    g = gradient_magnitude(f)
    return np.where(g > p.dz_cliff / f.cell_size, g, 0.0)


def window_side(d: float, cell_size: float) -> int:
    side = max(1, int(math.floor(d / cell_size + 0.5)))
    return side if side % 2 == 1 else side + 1


def clipped_mean(values: np.ndarray, side: int) -> np.ndarray:
    """Mean over a ``side`` x ``side`` window clipped at the grid border."""
    ones = np.ones_like(values, dtype=float)
    total = ndimage.uniform_filter(values.astype(float), size=side, mode="constant", cval=0.0)
    count = ndimage.uniform_filter(ones, size=side, mode="constant", cval=0.0)
    return total / count


def steep_field(f: HeightField, p: SolverParams) -> np.ndarray:
    residual = gradient_magnitude(f) - cliff_field(f, p)
    out = clipped_mean(residual, window_side(p.d, f.cell_size))
    # box-filter round-off must not turn exact zeros into tiny negatives
    return np.where(np.abs(out) < 1e-12, 0.0, out)
