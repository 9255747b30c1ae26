import math

import numpy as np
import pytest

from delrips import oracle
from delrips.complexes import build_rips
from delrips.errors import UnsupportedError
from delrips.experiments import InstanceSpec, generate
from delrips.geometry import PointCloud, validate_general_position
from delrips.persistence import compute_diagrams, extract_generators

from conftest import assert_oracle_match, boundary_is_zero, random_cloud


def three_lobe_cloud(n_per=18, seed=0):
    """Three near-tangent circles around the origin: three PH1 classes."""
    rng = np.random.default_rng(seed)
    rings = []
    for j in range(3):
        phi = 2 * np.pi * j / 3
        center = 1.08 * np.array([np.cos(phi), np.sin(phi), 0.0])
        t = np.linspace(0, 2 * np.pi, n_per, endpoint=False) + rng.uniform(0, 0.3)
        ring = center[None, :] + np.stack(
            [np.cos(t) * np.cos(phi), np.cos(t) * np.sin(phi), np.sin(t)], axis=1
        )
        rings.append(ring + rng.normal(0, 0.01, ring.shape))
    return PointCloud(np.vstack(rings))


def test_single_tetrahedron_codim1():
    cloud = random_cloud(0, 4, 3)
    result = assert_oracle_match(cloud)
    assert result.diagram.points(2) == []  # all candidate pairs have zero persistence
    kept = compute_diagrams(cloud, keep_zero=True).diagram
    zero2 = kept.finite_pairs(2, keep_zero=True)
    assert len(zero2) == 1 and zero2[0].death == zero2[0].birth


def test_dodecahedron_worst_ph2():
    eps = 1e-3
    cloud = generate(InstanceSpec("dodecahedron-worst", eps=eps, seed=1))
    result = compute_diagrams(cloud)
    pairs = sorted(result.diagram.points(2), key=lambda p: p[0] - p[1])
    assert pairs, "expected a PH2 class"
    b, d = pairs[0]
    assert abs(b - 2.0 / math.sqrt(3.0)) <= 5 * eps
    assert abs(d - 2.0) <= 5 * eps


def test_noisy_sphere_single_cavity():
    cloud = generate(InstanceSpec("noisy-sphere", n=200, noise=0.01, seed=5))
    result = assert_oracle_match(cloud)
    big = [p for p in result.diagram.finite_pairs(2) if p.persistence > 0.5]
    assert len(big) == 1


def test_hexagon_worst_ph1():
    eps = 1e-3
    cloud = generate(InstanceSpec("hexagon-worst", eps=eps, seed=1))
    result = compute_diagrams(cloud)
    pts = result.diagram.points(1)
    assert len(pts) == 1
    b, d = pts[0]
    assert abs(b - 1.0) <= 5 * eps and abs(d - 2.0) <= 5 * eps


def test_three_lobe_ph1_births_are_ug_minus_mst():
    cloud = three_lobe_cloud()
    report = validate_general_position(cloud)
    assert report.clean
    result = compute_diagrams(cloud)
    big = [p for p in result.diagram.finite_pairs(1) if p.persistence > 0.5]
    assert len(big) == 3
    positive = result.diagram.finite_pairs(1)
    ug_minus_mst = {
        tuple(r)
        for r in result.complex.verts[1][result.ug.mask & ~result.mst.mask].tolist()
    }
    assert {p.birth_simplex for p in positive} == ug_minus_mst
    # the figure's other ingredient: non-manifold edges beyond the Urquhart graph
    stage1 = result.stages[1]
    assert int((stage1.nm.mask & ~stage1.us.mask).sum()) > 0


def test_noisy_circle_persistent_loop():
    cloud = generate(InstanceSpec("noisy-circle", n=100, noise=0.01, seed=5))
    result = assert_oracle_match(cloud)
    loops = [p for p in result.diagram.finite_pairs(1) if p.death / p.birth > 3]
    assert len(loops) == 1


@pytest.mark.parametrize(
    "seed,n,d", [(0, 20, 2), (1, 35, 2), (2, 18, 3), (3, 26, 3), (4, 11, 4), (5, 13, 4)]
)
def test_oracle_equivalence_random(seed, n, d):
    assert_oracle_match(random_cloud(seed, n, d))


def test_intermediate_additional_apparent_pairs_d4():
    # every non-Urquhart non-manifold separator is paired by the cell
    # reduction, with zero persistence: exactly |NM_2 \ US_2| extra pairs
    from delrips.spanning import verify_spanning_acycle

    for seed in range(3):
        result = assert_oracle_match(random_cloud(30 + seed, 12, 4))
        stage = result.stages[2]
        expected = int((stage.nm.mask & ~stage.us.mask).sum())
        assert stage.n_nonurquhart_pairs == expected
        assert stage.unpaired_nonurquhart == []
        fc = result.complex
        for p in stage.pairs:
            if p.essential:
                continue
            _, rank = fc.index_of(p.birth_simplex)
            if stage.nm.mask[rank] and not stage.us.mask[rank]:
                assert p.death == p.birth
        if seed == 0:
            assert verify_spanning_acycle(2, stage.msa, fc)


def test_ph0_equals_rips_ph0():
    for seed, n, d in ((0, 25, 2), (1, 20, 3)):
        cloud = random_cloud(seed, n, d)
        result = compute_diagrams(cloud, keep_zero=True)
        rips = oracle.reduce(build_rips(cloud, 1))
        mine = sorted(t for t in result.diagram.multiset() if t[0] == 0)
        ref = sorted(t for t in rips.multiset() if t[0] == 0)
        assert mine == ref
        assert len([t for t in mine if not math.isinf(t[2])]) == n - 1


def test_bookkeeping_identity():
    result = compute_diagrams(random_cloud(7, 28, 3), keep_zero=True)
    finite = [p for p in result.diagram.pairs if not p.essential]
    essential = [p for p in result.diagram.pairs if p.essential]
    assert 2 * len(finite) + len(essential) == result.complex.total
    assert len(essential) == 1 and essential[0].dim == 0


def test_positive_births_in_us_minus_msa():
    for seed, d in ((8, 2), (9, 3)):
        result = compute_diagrams(random_cloud(seed, 20, d), keep_zero=True)
        fc = result.complex
        for k in range(1, d):
            stage = result.stages[k]
            us, msa = stage.us, stage.msa
            for p in stage.pairs:
                if p.essential or p.death <= p.birth:
                    continue
                _, rank = fc.index_of(p.birth_simplex)
                assert us.mask[rank] and not msa.mask[rank]


def test_zero_ph1_pairs_are_apparent_on_oracle_output():
    cloud = random_cloud(10, 22, 2)
    assert validate_general_position(cloud).clean
    fc = compute_diagrams(cloud, keep_zero=True).complex
    dgm = oracle.reduce(fc)
    maxfac = fc.max_facet_of(2)
    counts, indptr, owners = fc.cofacet_table(1, np.arange(fc.size(2)))
    for p in dgm.pairs:
        if p.dim != 1 or p.essential or p.death != p.birth:
            continue
        _, erank = fc.index_of(p.birth_simplex)
        _, trank = fc.index_of(p.death_simplex)
        assert maxfac[trank] == erank  # birth edge is the triangle's max facet
        cof = owners[indptr[erank] : indptr[erank + 1]]
        assert trank == int(cof.min())  # and the triangle is its oldest cofacet


def test_threads_identical_diagrams():
    rng = np.random.default_rng(123)
    for i in range(10):
        n = int(rng.integers(8, 30))
        d = 2 if i % 2 == 0 else 3
        cloud = PointCloud(rng.random((n, d)))
        a = compute_diagrams(cloud, keep_zero=True, threads=1).diagram.multiset()
        b = compute_diagrams(cloud, keep_zero=True, threads=3).diagram.multiset()
        assert sorted(a) == sorted(b)


def test_d1_special_case():
    cloud = PointCloud(np.array([[0.0], [0.5], [1.7], [4.0]]))
    result = compute_diagrams(cloud)
    assert result.diagram.dims == [0]
    deaths = sorted(p.death for p in result.diagram.finite_pairs(0))
    assert deaths == pytest.approx([0.5, 1.2, 2.3], abs=1e-12)


def test_generators_circle_and_sphere():
    circle = generate(InstanceSpec("noisy-circle", n=100, noise=0.01, seed=5))
    gens = extract_generators(circle, min_persistence=0.5)
    assert len(gens) == 1 and gens[0].dim == 1
    assert boundary_is_zero(gens[0].simplices)
    # chains consist of Urquhart/non-manifold edges only
    result = compute_diagrams(circle, keep_zero=True)
    sep = {
        tuple(r)
        for r in result.complex.verts[1][
            result.stages[1].us.mask | result.stages[1].nm.mask
        ].tolist()
    }
    assert set(gens[0].simplices) <= sep

    sphere = generate(InstanceSpec("noisy-sphere", n=150, noise=0.01, seed=5))
    gens2 = extract_generators(sphere, min_persistence=0.5)
    assert len(gens2) == 1 and gens2[0].dim == 2
    assert boundary_is_zero(gens2[0].simplices)
    res2 = compute_diagrams(sphere, keep_zero=True)
    us2 = {
        tuple(r)
        for r in res2.complex.verts[2][res2.stages[2].us.mask].tolist()
    }
    assert set(gens2[0].simplices) <= us2


def test_generators_empty_above_max_persistence():
    circle = generate(InstanceSpec("noisy-circle", n=60, noise=0.01, seed=2))
    assert extract_generators(circle, min_persistence=1e9) == []


def test_generators_require_d3():
    with pytest.raises(UnsupportedError):
        extract_generators(random_cloud(0, 10, 2))


def test_near_cospherical_fuzz():
    # tiny-noise circle/sphere samples sit next to the degenerate locus;
    # the exact predicates must keep the pipeline on the oracle
    rng = np.random.default_rng(999)
    for i in range(8):
        n = int(rng.integers(6, 20))
        if i % 2 == 0:
            t = rng.uniform(0, 2 * np.pi, n)
            pts = np.stack([np.cos(t), np.sin(t)], 1) + rng.normal(0, 1e-7, (n, 2))
        else:
            v = rng.standard_normal((n, 3))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            pts = v + rng.normal(0, 1e-7, (n, 3))
        assert_oracle_match(PointCloud(pts))


def test_exactly_cocircular_rationals_with_perturbation():
    # rational points on the unit circle are exactly cocircular; the
    # index-weight perturbation must produce oracle-identical diagrams
    for ts in ((1, 2, 3, 5, 8), (2, 4, 7, 9, 11, 13)):
        pts = [[(1 - t * t) / (1 + t * t), (2 * t) / (1 + t * t)] for t in ts]
        assert_oracle_match(PointCloud(np.array(pts)), perturb=True)
