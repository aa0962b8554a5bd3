import math

import numpy as np

from structsynth.config import SolverParams
from structsynth.heightfield import HeightField
from structsynth.pipeline import solve
from structsynth.pnm import read_pnm
from structsynth.render import BUILD_POINT_RGB, STRUCTURE_RGB, raster, render
from structsynth.structure import BlockType, build_structure

P = SolverParams()


def blue_mask(img):
    return np.all(img == STRUCTURE_RGB, axis=2)


def test_flat_map_uniform(tmp_path):
    f = HeightField(np.zeros((12, 17)))
    path = tmp_path / "flat.ppm"
    render(f, None, [], path)
    img = read_pnm(path.read_bytes())
    assert img.shape == (12, 17, 3)
    assert len(np.unique(img.reshape(-1, 3), axis=0)) == 1
    assert np.all(img[..., 0] == img[..., 1])


def test_ramp_cells_drawn(step16):
    res = solve(step16, P)
    img = raster(step16, res.regions, res.chosen)
    expect = np.zeros(step16.shape[0] * step16.shape[1], dtype=bool)
    for c in res.chosen[0].cells:
        expect[c.covered] = True
    assert np.array_equal(blue_mask(img).ravel(), expect)


def test_diagonal_structure_matches_covered_nodes():
    f = HeightField(np.zeros((40, 40)))
    s = math.sqrt(0.5)
    T = build_structure((8, 8), (s, s), [0, 0, 0], [BlockType.NONE, BlockType.BLOCK, BlockType.NONE],
                        f, P, 0, 0)
    img = raster(f, None, [T])
    expect = np.zeros(1600, dtype=bool)
    for c in T.cells:
        expect[c.covered] = True
    assert np.array_equal(blue_mask(img).ravel(), expect)


def test_build_points_marked():
    f = HeightField(np.zeros((10, 10)))
    img = raster(f, None, [], [(3.0, 4.0)])
    assert tuple(img[4, 3]) == BUILD_POINT_RGB
