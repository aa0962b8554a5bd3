import math

import numpy as np
import pytest

from structsynth.buildpoints import estimate_normal, extract_build_points
from structsynth.config import SolverParams
from structsynth.heightfield import HeightField
from structsynth.pipeline import analyse

from conftest import step_field

P = SolverParams()


def candidates(z):
    f = HeightField(np.asarray(z, dtype=float))
    m = analyse(f, P)
    return f, m, extract_build_points(m, f, P)


def test_flat_field_has_none():
    assert candidates(np.zeros((20, 20)))[2] == []


def test_straight_step():
    f, m, cands = candidates(step_field(16.0, width=40, height=20, at=20).z)
    # one cliff edge per row; rows too close to the border lose a class sample
    assert 16 <= len(cands) <= 20
    for c in cands:
        assert c.b[0] == pytest.approx(19.5)
        assert c.u == pytest.approx((1.0, 0.0))
        assert c.flatness_error == 0
        assert c.top_region == m.labels[int(c.b[1]), 0]


def test_u_points_to_low_side():
    z = step_field(16.0, width=40, height=20, at=20).z[:, ::-1]
    for c in candidates(z)[2]:
        assert c.u == pytest.approx((-1.0, 0.0))


def test_diagonal_cliff():
    y, x = np.mgrid[0:40, 0:40]
    z = np.where(x + y < 40, 16.0, 0.0)
    _, _, cands = candidates(z)
    assert cands
    s = math.sqrt(2) / 2
    for c in cands:
        assert c.u == pytest.approx((s, s), abs=0.09)   # within 5 degrees
        assert c.flatness_error <= P.normal_reject_rate


def test_inside_corner_rejected():
    # low quadrant cut into a raised plateau: the top region wraps 270 degrees
    z = np.full((40, 40), 16.0)
    z[20:, 20:] = 0
    f = HeightField(z)
    m = analyse(f, P)
    top = int(m.labels[0, 0])
    for b in [(20.0, 19.5), (19.5, 19.5)]:
        assert estimate_normal(b, top, m, f, P) is None
        _, err = estimate_normal(b, top, m, f, SolverParams(normal_reject_rate=1.0))
        assert err > 0.10


def test_degenerate_class_rejected():
    f = HeightField(np.zeros((20, 20)))
    m = analyse(f, P)
    assert estimate_normal((10.0, 10.0), int(m.labels[0, 0]), m, f, P) is None


def test_candidates_lie_on_cliff_edges():
    rng = np.random.default_rng(3)
    z = np.kron(rng.integers(0, 3, (3, 3)) * 8.0, np.ones((16, 16)))
    f, m, cands = candidates(z)
    mids = {(0.5 * (xa + xb), 0.5 * (ya + yb)) for (xa, ya), (xb, yb) in m.cliff_edges}
    for c in cands:
        assert c.b in mids
        assert math.hypot(*c.u) == pytest.approx(1.0)
        assert 0 <= c.flatness_error <= P.normal_reject_rate


@pytest.mark.parametrize("seed", range(4))
def test_rotation_equivariance(seed):
    rng = np.random.default_rng(seed)
    z = np.kron(rng.integers(0, 3, (3, 3)) * 8.0, np.ones((14, 14)))
    size = z.shape[1]
    _, _, base = candidates(z)
    _, _, rot = candidates(np.rot90(z))
    # np.rot90 sends node (x, y) to (y, W-1-x) and a vector (ux, uy) to (uy, -ux)
    want = sorted((round(c.b[1], 6), round(size - 1 - c.b[0], 6), round(c.u[1], 9), round(-c.u[0], 9),
                   c.flatness_error) for c in base)
    got = sorted((round(c.b[0], 6), round(c.b[1], 6), round(c.u[0], 9), round(c.u[1], 9),
                  c.flatness_error) for c in rot)
    assert got == want
