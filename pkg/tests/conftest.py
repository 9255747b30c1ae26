import numpy as np
import pytest

from delrips import oracle
from delrips.geometry import PointCloud
from delrips.persistence import compute_diagrams


def random_cloud(seed, n, d) -> PointCloud:
    rng = np.random.default_rng(seed)
    return PointCloud(rng.random((n, d)))


def assert_oracle_match(cloud, perturb=False, threads=1):
    """Pipeline output must equal the boundary-matrix reduction exactly,
    as a multiset of (dim, birth, death) with zero pairs included."""
    result = compute_diagrams(cloud, keep_zero=True, perturb=perturb, threads=threads)
    reference = oracle.reduce(result.complex)
    assert sorted(result.diagram.multiset()) == sorted(reference.multiset())
    return result


def boundary_is_zero(simplices) -> bool:
    """Z/2 boundary check for a chain given as vertex tuples."""
    from collections import Counter

    counts = Counter()
    for s in simplices:
        for i in range(len(s)):
            counts[s[:i] + s[i + 1 :]] += 1
    return all(c % 2 == 0 for c in counts.values())


@pytest.fixture
def quad_cloud():
    # convex quadrilateral, no cocircularity; Delaunay diagonal is (0, 2)
    return PointCloud(np.array([[0.0, 0.0], [3.0, 0.0], [3.2, 2.0], [-0.5, 1.8]]))
