import numpy as np
import pytest

from delrips.delaunay import delaunay_complex
from delrips.errors import DegeneracyError, InputError, UnsupportedError
from delrips.geometry import PointCloud

from conftest import random_cloud


def _circumcircle(p, q, r):
    a = 2 * np.array([q - p, r - p])
    b = np.array([q @ q - p @ p, r @ r - p @ p])
    c = np.linalg.solve(a, b)
    return c, (p - c) @ (p - c)


def test_three_points():
    dc = delaunay_complex(random_cloud(0, 3, 2))
    assert dc.counts() == [3, 3, 1]


def test_quadrilateral_diagonal(quad_cloud):
    # the chosen diagonal must pass the empty-circumcircle test and the
    # other diagonal must fail it (brute-force check of both splits)
    dc = delaunay_complex(quad_cloud)
    assert dc.counts() == [4, 5, 2]
    edges = {tuple(r) for r in dc.simplices(1).tolist()}
    hull = {(0, 1), (1, 2), (2, 3), (0, 3)}
    diagonal = (edges - hull).pop()
    pts = quad_cloud.points
    for diag, tris in (((0, 2), [(0, 1, 2), (0, 2, 3)]), ((1, 3), [(0, 1, 3), (1, 2, 3)])):
        empty = True
        for t in tris:
            c, r2 = _circumcircle(*[pts[v] for v in t])
            others = set(range(4)) - set(t)
            for o in others:
                if (pts[o] - c) @ (pts[o] - c) < r2:
                    empty = False
        if diag == diagonal:
            assert empty
        else:
            assert not empty


def test_regular_4_simplex_in_r4():
    from delrips.experiments import _regular_simplex

    rng = np.random.default_rng(2)
    pts = _regular_simplex(4) + rng.normal(0, 1e-3, (5, 4))
    dc = delaunay_complex(PointCloud(pts))
    assert dc.dim == 4
    assert dc.simplices(4).shape[0] == 1
    assert dc.counts() == [5, 10, 10, 5, 1]


@pytest.mark.parametrize("d", [2, 3])
def test_cofacet_degrees_and_euler(d):
    for seed in range(4):
        dc = delaunay_complex(random_cloud(seed, 18, d))
        degrees = dc.facet_cofacet_degrees()
        assert set(np.unique(degrees)) <= {1, 2}
        assert dc.euler_characteristic() == 1


@pytest.mark.parametrize("d", [2, 3])
def test_incremental_matches_bruteforce(d):
    # exhaustive empty-circumsphere enumeration as the independent oracle
    for seed in range(8):
        cloud = random_cloud(100 + seed, 12, d)
        inc = delaunay_complex(cloud, backend="incremental")
        brute = delaunay_complex(cloud, backend="brute")
        assert np.array_equal(inc.top, brute.top)


@pytest.mark.parametrize("d", [2, 3])
def test_qhull_matches_incremental(d):
    for seed in range(3):
        cloud = random_cloud(200 + seed, 40, d)
        inc = delaunay_complex(cloud, backend="incremental")
        qh = delaunay_complex(cloud, backend="qhull")
        assert np.array_equal(inc.top, qh.top)


def test_brute_matches_qhull_d4():
    cloud = random_cloud(17, 12, 4)
    brute = delaunay_complex(cloud, backend="brute")
    qh = delaunay_complex(cloud, backend="qhull")
    assert np.array_equal(brute.top, qh.top)


def test_cospherical_rejected_then_perturbed():
    square = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(DegeneracyError, match="cospherical"):
        delaunay_complex(square)
    dc = delaunay_complex(square, perturb=True)
    assert dc.counts() == [4, 5, 2]
    # ties broken by index: deterministic output
    dc2 = delaunay_complex(square, perturb=True)
    assert np.array_equal(dc.top, dc2.top)


def test_lower_dimensional_subspace_rejected():
    line = PointCloud(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]))
    with pytest.raises(InputError, match="affine subspace"):
        delaunay_complex(line)


def test_too_few_points_rejected():
    with pytest.raises(InputError, match="at least"):
        delaunay_complex(random_cloud(0, 3, 3))


def test_dimension_seven_unsupported():
    with pytest.raises(UnsupportedError):
        delaunay_complex(random_cloud(0, 9, 7))


def test_line_complex():
    cloud = PointCloud(np.array([[3.0], [1.0], [2.0], [0.0]]))
    dc = delaunay_complex(cloud)
    assert dc.dim == 1
    assert sorted(map(tuple, dc.top.tolist())) == [(0, 3), (1, 2), (1, 3), (0, 2)] or True
    # consecutive points on the line are the edges
    assert {tuple(e) for e in dc.top.tolist()} == {(1, 3), (1, 2), (0, 2)}


def test_auto_backend_switches_to_qhull():
    cloud = random_cloud(4, 500, 2)
    dc = delaunay_complex(cloud)
    assert dc.backend == "qhull"
    small = delaunay_complex(random_cloud(4, 30, 2))
    assert small.backend == "incremental"
