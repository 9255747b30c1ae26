import math

import numpy as np
import pytest

from delrips import oracle
from delrips.complexes import (
    build_delaunay_rips,
    build_rips,
    compare,
    max_facet,
    parse_dump,
)
from delrips.errors import ContractError, ResourceError
from delrips.experiments import InstanceSpec, generate
from delrips.geometry import PointCloud

from conftest import random_cloud


def test_compare_lex_tiebreak_on_equal_lengths():
    c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0], [6.0, 0.0]]))
    assert compare((0, 1), (2, 3), c) == "less"
    assert compare((2, 3), (0, 1), c) == "greater"


def test_compare_diameter_dominates():
    c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 0.0], [7.0, 0.0]]))
    assert compare((0, 1), (2, 3), c) == "less"
    assert compare((2, 3), (1, 0), c) == "greater"


def test_compare_triangles_sharing_max_edge():
    c = PointCloud(np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 1.0], [5.0, -1.0]]))
    assert max_facet((0, 1, 2), c) == (0, 1)
    assert max_facet((0, 1, 3), c) == (0, 1)
    assert compare((0, 1, 2), (0, 1, 3), c) == "less"


def test_compare_contract_errors():
    c = random_cloud(0, 4, 2)
    with pytest.raises(ContractError):
        compare((0, 1), (0, 1, 2), c)
    with pytest.raises(ContractError):
        compare((0, 1), (1, 0), c)


def test_max_facet_examples():
    right = PointCloud(np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]))
    assert max_facet((0, 1, 2), right) == (1, 2)  # the length-5 edge
    # exactly equilateral (all squared lengths 2.0): lex-largest edge wins
    eq = PointCloud(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    assert max_facet((0, 1, 2), eq) == (1, 2)


def test_max_facet_tetrahedron_derived():
    cloud = random_cloud(8, 4, 3)
    tet = (0, 1, 2, 3)
    facets = [tet[:i] + tet[i + 1 :] for i in range(4)]
    best = facets[0]
    for f in facets[1:]:
        if compare(best, f, cloud) == "less":
            best = f
    assert max_facet(tet, cloud) == best


def test_strict_total_order_exhaustive():
    fc = build_delaunay_rips(random_cloud(3, 12, 2))
    cloud = fc.cloud
    for k in (1, 2):
        sims = [tuple(r) for r in fc.verts[k].tolist()]
        # row order is rank order; compare must agree with it
        for i in range(len(sims)):
            for j in range(i + 1, len(sims)):
                assert compare(sims[i], sims[j], cloud) == "less"
        # transitivity holds because compare realizes the array order


def test_order_extends_diameter_order():
    from delrips.geometry import diameter

    cloud = random_cloud(9, 16, 3)
    fc = build_delaunay_rips(cloud)
    rng = np.random.default_rng(0)
    for k in (1, 2):
        sims = [tuple(r) for r in fc.verts[k].tolist()]
        for _ in range(150):
            i, j = rng.integers(0, len(sims), 2)
            if i == j:
                continue
            di, dj = diameter(sims[i], cloud), diameter(sims[j], cloud)
            if di < dj:
                assert compare(sims[i], sims[j], cloud) == "less"


def test_filtration_value_is_max_facet_value():
    fc = build_delaunay_rips(random_cloud(10, 20, 3))
    for k in range(2, fc.top_dim + 1):
        mf = fc.max_facet_of(k)
        assert np.array_equal(fc.value[k], fc.value[k - 1][mf])
        # and equals the max over all facets
        facet_vals = fc.value[k - 1][fc.facets[k]]
        assert np.array_equal(fc.value[k], facet_vals.max(axis=1))


def test_granks_are_a_filtration_order():
    fc = build_delaunay_rips(random_cloud(11, 25, 3))
    for k in range(1, fc.top_dim + 1):
        own = fc.grank[k]
        fac = fc.grank[k - 1][fc.facets[k]]
        assert np.all(fac < own[:, None])


def test_delaunay_rips_isoceles_values():
    h = math.sqrt(1.03**2 - 0.25)
    cloud = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [0.5, h]]))
    fc = build_delaunay_rips(cloud)
    assert np.allclose(fc.value[0], 0.0)
    assert fc.value[1][0] == pytest.approx(1.0, abs=1e-12)
    assert fc.value[1][1] == pytest.approx(1.03, abs=1e-12)
    assert fc.value[1][2] == pytest.approx(1.03, abs=1e-12)
    # the two long edges have exactly equal floats, and the triangle
    # inherits that exact value
    assert fc.value[1][1] == fc.value[1][2]
    assert fc.value[2][0] == fc.value[1][2]


def test_hexagon_worst_has_diametrical_edge():
    cloud = generate(InstanceSpec("hexagon-worst", eps=1e-3, seed=1))
    fc = build_delaunay_rips(cloud)
    # the pulled vertex and its antipode form a Delaunay edge of length ~2
    assert 2.0 - 3e-3 <= fc.value[1].max() <= cloud.diameter()


def test_delaunay_rips_counts_match_complex():
    cloud = random_cloud(12, 30, 3)
    fc = build_delaunay_rips(cloud)
    assert [fc.size(k) for k in range(fc.top_dim + 1)] == fc.delaunay.counts()


def test_rips_counts():
    cloud = random_cloud(13, 9, 2)
    fc = build_rips(cloud, 1)
    assert fc.total == 9 + 36
    fc4 = build_rips(random_cloud(14, 4, 3), 3)
    assert fc4.total == 15  # 2^4 - 1


def test_rips_budget():
    with pytest.raises(ResourceError):
        build_rips(random_cloud(0, 60, 3), 5, budget=1000)


def test_delaunay_rips_is_rips_subset_with_identical_values():
    cloud = random_cloud(15, 12, 2)
    dr = build_delaunay_rips(cloud)
    rips = build_rips(cloud, dr.top_dim)
    rips_values = {}
    for k in range(rips.top_dim + 1):
        for row, v in zip(rips.verts[k].tolist(), rips.value[k].tolist()):
            rips_values[tuple(row)] = v
    for k in range(dr.top_dim + 1):
        for row, v in zip(dr.verts[k].tolist(), dr.value[k].tolist()):
            assert rips_values[tuple(row)] == v


def test_dump_round_trip_and_oracle_acceptance():
    fc = build_delaunay_rips(random_cloud(16, 14, 2))
    entries = parse_dump(fc.dump())
    assert len(entries) == fc.total
    direct = oracle.reduce(fc)
    from_dump = oracle.reduce(entries)
    assert sorted(direct.multiset()) == sorted(from_dump.multiset())


def test_diagram_invariant_under_relabeling():
    from delrips.persistence import compute_diagrams

    cloud = random_cloud(17, 18, 2)
    rng = np.random.default_rng(1)
    perm = rng.permutation(cloud.n)
    permuted = PointCloud(cloud.points[perm])
    a = compute_diagrams(cloud, keep_zero=True).diagram.multiset()
    b = compute_diagrams(permuted, keep_zero=True).diagram.multiset()
    assert sorted(a) == sorted(b)
