"""Minimal portable graymap/pixmap reader and writer (P2, P5, P3, P6)."""

from __future__ import annotations

import numpy as np


class FormatError(ValueError):
    """Malformed grid or image document."""


def _tokens(data: bytes, count: int, start: int = 0):
    """Read ``count`` whitespace separated header tokens, skipping comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last token.
    """
    out = []
    i = start
    n = len(data)
    while len(out) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        if j == i:
            raise FormatError("truncated header")
        out.append(data[i:j])
        i = j
    return out, i + 1


def read_pnm(data: bytes) -> np.ndarray:
    """Decode a PGM/PPM document into an array of shape (H, W) or (H, W, 3)."""
    if len(data) < 2 or data[:1] != b"P":
        raise FormatError("not a portable anymap")
    magic = data[:2]
    if magic not in (b"P2", b"P5", b"P3", b"P6"):
        raise FormatError(f"unsupported anymap type {magic!r}")
    header, offset = _tokens(data, 3, 2)
    try:
        width, height, maxval = (int(t) for t in header)
    except ValueError as exc:
        raise FormatError("non-numeric header field") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError("bad anymap dimensions")
    channels = 3 if magic in (b"P3", b"P6") else 1
    count = width * height * channels
    if magic in (b"P2", b"P3"):
        body = data[offset - 1:].split()
        if len(body) < count:
            raise FormatError("truncated raster")
        try:
            flat = np.array([int(t) for t in body[:count]], dtype=np.int64)
        except ValueError as exc:
            raise FormatError("non-numeric raster value") from exc
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[offset:offset + count * dtype.itemsize]
        if len(raw) < count * dtype.itemsize:
            raise FormatError("truncated raster")
        flat = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if flat.max(initial=0) > maxval:
        raise FormatError("raster value exceeds maxval")
    shape = (height, width, 3) if channels == 3 else (height, width)
    return flat.reshape(shape)


def write_pgm(pixels: np.ndarray, maxval: int = 255) -> bytes:
    pixels = np.asarray(pixels)
    height, width = pixels.shape
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    return header + np.clip(pixels, 0, maxval).astype(dtype).tobytes()


def write_ppm(pixels: np.ndarray) -> bytes:
    pixels = np.asarray(pixels)
    height, width, _ = pixels.shape
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + np.clip(pixels, 0, 255).astype("u1").tobytes()
