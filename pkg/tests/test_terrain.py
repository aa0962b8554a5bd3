from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from structsynth.config import SolverParams
from structsynth.heightfield import HeightField, steep_field
from structsynth.terrain import (BLOCKED, PRUNED, build_region_map, fits_square,
                                 prune_small_regions)

P = SolverParams()


def flood_fill_partition(f, p):
    """Independent region oracle: BFS over cliff-free edges between non-steep nodes, from raw heights."""
    z = f.z
    h, w = z.shape
    ok = steep_field(f, p) <= p.k_steep
    seen = -np.ones((h, w), dtype=int)
    parts = []
    for y in range(h):
        for x in range(w):
            if not ok[y, x] or seen[y, x] >= 0:
                continue
            part = set()
            q = deque([(x, y)])
            seen[y, x] = len(parts)
            while q:
                cx, cy = q.popleft()
                part.add((cx, cy))
                for nx, ny in ((cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)):
                    if 0 <= nx < w and 0 <= ny < h and ok[ny, nx] and seen[ny, nx] < 0 \
                            and abs(z[ny, nx] - z[cy, cx]) <= p.dz_cliff:
                        seen[ny, nx] = len(parts)
                        q.append((nx, ny))
            parts.append(frozenset(part))
    return set(parts)


def partition_of(m):
    return {frozenset((int(x), int(y)) for y, x in zip(*np.nonzero(m.labels == r.id)))
            for r in m.regions}


def test_flat_single_region():
    m = build_region_map(HeightField(np.zeros((10, 10))), P)
    assert len(m.regions) == 1
    assert m.regions[0].size == 100
    assert m.cliff_edges == ()


def test_step_two_regions():
    z = np.zeros((10, 20))
    z[:, 10:] = 16
    m = build_region_map(HeightField(z), P)
    assert len(m.regions) == 2
    assert len(m.cliff_edges) == 10
    assert all(a[0] == 9 and b[0] == 10 for a, b in m.cliff_edges)


def test_slope_band_blocks():
    # 3 cm per cell band across the middle: too steep to drive, too gentle to be a cliff
    z = np.zeros((30, 40))
    z[:, 15:25] = 3.0 * np.arange(1, 11)
    z[:, 25:] = 30
    m = build_region_map(HeightField(z), P)
    assert len(m.regions) == 2
    assert np.all(m.labels[:, 18:22] == BLOCKED)


def test_labels_by_first_appearance():
    z = np.zeros((10, 20))
    z[:, :10] = 16
    m = build_region_map(HeightField(z), P)
    assert m.label_at(0, 0) == 0
    assert m.label_at(19, 9) == 1
    assert m.regions[1].representative == (10, 0)


@settings(max_examples=200, deadline=None)
@given(arrays(np.int64, (12, 12), elements=st.integers(0, 3)))
def test_partition_matches_flood_fill(levels):
    f = HeightField(levels * 5.0)
    assert partition_of(build_region_map(f, P)) == flood_fill_partition(f, P)


def test_edges_never_join_regions():
    rng = np.random.default_rng(3)
    f = HeightField(rng.integers(0, 4, (15, 15)) * 5.0)
    m = build_region_map(f, P)
    lab = m.labels
    h_pairs = m.edge_h[:, :-1]
    assert np.all(lab[:, :-1][h_pairs] == lab[:, 1:][h_pairs])
    v_pairs = m.edge_v[:-1, :]
    assert np.all(lab[:-1, :][v_pairs] == lab[1:, :][v_pairs])
    assert sum(r.size for r in m.regions) == np.count_nonzero(lab >= 0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.int64, (10, 10), elements=st.integers(0, 4)), st.floats(1, 6))
def test_raising_dz_cliff_only_merges(levels, dz):
    # slope blocking disabled so the threshold acts on edges alone
    f = HeightField(levels * 4.0)
    lo = build_region_map(f, SolverParams(dz_cliff=dz, k_steep=1e6, L_B=16))
    hi = build_region_map(f, SolverParams(dz_cliff=dz * 1.5, k_steep=1e6, L_B=16))
    assert len(hi.regions) <= len(lo.regions)
    for r in lo.regions:
        assert len(np.unique(hi.labels[lo.labels == r.id])) == 1


@settings(max_examples=40, deadline=None)
@given(arrays(np.int64, (10, 10), elements=st.integers(0, 4)), st.floats(0.2, 3))
def test_raising_k_steep_grows_traversable_set(levels, k):
    f = HeightField(levels * 3.0)
    lo = build_region_map(f, SolverParams(k_steep=k))
    hi = build_region_map(f, SolverParams(k_steep=k * 2))
    assert np.all(hi.traversable[lo.traversable])
    for r in lo.regions:
        assert len(np.unique(hi.labels[lo.labels == r.id])) == 1


# ------------------------------------------------------------------ pruning

def test_exact_square_kept():
    z = np.full((20, 20), 50.0)
    z[4:12, 4:12] = 0  # 8 x 8 nodes
    f = HeightField(z)
    m = prune_small_regions(build_region_map(f, SolverParams(k_steep=100)), SolverParams(k_steep=100))
    assert any(np.all(m.labels[4:12, 4:12] == r.id) for r in m.regions)


def test_strip_pruned():
    z = np.full((50, 20), 50.0)
    z[5:45, 8:12] = 0  # 4 wide, 40 long
    p = SolverParams(k_steep=100)
    m = prune_small_regions(build_region_map(HeightField(z), p), p)
    assert np.all(m.labels[5:45, 8:12] == PRUNED)


def test_l_shape_kept():
    z = np.full((30, 30), 50.0)
    z[2:6, 2:28] = 0
    z[2:12, 18:26] = 0  # 8 wide arm
    p = SolverParams(k_steep=100)
    m = prune_small_regions(build_region_map(HeightField(z), p), p)
    assert m.labels[3, 3] >= 0


@pytest.mark.parametrize("side,expected", [(3, True), (4, False)])
def test_fits_square(side, expected):
    mask = np.zeros((6, 6), dtype=bool)
    mask[1:4, 2:5] = True
    assert fits_square(mask, side) is expected


def test_export_text():
    z = np.zeros((3, 4))
    z[:, 2:] = 20
    m = build_region_map(HeightField(z), P)
    rows = [list(map(int, line.split(","))) for line in m.export_text().splitlines()]
    assert np.array_equal(np.array(rows), m.labels)
