"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines.  The bound-histogram criterion performs 1200 Rips reductions and
dominates the runtime (several minutes single-threaded).
"""

import math
import resource
import time

import numpy as np
import pytest

from delrips import oracle
from delrips.experiments import (
    InstanceSpec,
    bound_histogram,
    generate,
    stability_sweep,
)
from delrips.geometry import PointCloud, diameter, jung_constant, meb_radius
from delrips.metrics import (
    DiagramPointSet,
    bottleneck,
    log_diagram,
    rips_diagram,
)
from delrips.persistence import compute_diagrams
from delrips.spanning import verify_spanning_acycle

from conftest import random_cloud


def _report(name, ok):
    print(f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, name


def _instances():
    out = []
    rng = np.random.default_rng(20240801)
    for i in range(100):
        out.append((f"d2-{i}", random_cloud(1000 + i, int(rng.integers(5, 41)), 2)))
    for i in range(80):
        out.append((f"d3-{i}", random_cloud(2000 + i, int(rng.integers(5, 41)), 3)))
    for i in range(20):
        out.append((f"d4-{i}", random_cloud(3000 + i, int(rng.integers(6, 16)), 4)))
    return out


def test_oracle_equivalence_200_clouds():
    start = time.time()
    ok = True
    for name, cloud in _instances():
        result = compute_diagrams(cloud, keep_zero=True)
        reference = oracle.reduce(result.complex)
        if sorted(result.diagram.multiset()) != sorted(reference.multiset()):
            ok = False
            print(f"  mismatch on {name}")
    elapsed = time.time() - start
    ok = ok and elapsed < 60.0
    print(f"  (200 instances in {elapsed:.1f}s)")
    _report("oracle equivalence on 200 seeded clouds in <60s", ok)


def test_worst_case_figures():
    eps = 1e-3
    ok = True

    hexa = generate(InstanceSpec("hexagon-worst", eps=eps, seed=1))
    dr1 = compute_diagrams(hexa).diagram
    rips1 = rips_diagram(hexa, 2)
    (b, d) = max(dr1.points(1), key=lambda p: p[1] - p[0])
    ok &= abs(b - 1.0) <= 5 * eps and abs(d - 2.0) <= 5 * eps
    (rb, rd) = max(rips1.points(1), key=lambda p: p[1] - p[0])
    ok &= abs(rb - 1.0) <= 5 * eps and abs(rd - math.sqrt(3.0)) <= 5 * eps
    gap1 = bottleneck(
        log_diagram(DiagramPointSet.from_diagram(dr1, 1)),
        log_diagram(DiagramPointSet.from_diagram(rips1, 1)),
    )
    ok &= abs(gap1 - math.log(2.0 / math.sqrt(3.0))) <= 0.01

    dodeca = generate(InstanceSpec("dodecahedron-worst", eps=eps, seed=1))
    dr2 = compute_diagrams(dodeca).diagram
    rips2 = rips_diagram(dodeca, 3)
    (b, d) = max(dr2.points(2), key=lambda p: p[1] - p[0])
    ok &= abs(b - 2.0 / math.sqrt(3.0)) <= 5 * eps and abs(d - 2.0) <= 5 * eps
    (rb, rd) = max(rips2.points(2), key=lambda p: p[1] - p[0])
    ok &= abs(rb - 2.0 / math.sqrt(3.0)) <= 5 * eps
    ok &= abs(rd - 4.0 / math.sqrt(6.0)) <= 5 * eps
    gap2 = bottleneck(
        log_diagram(DiagramPointSet.from_diagram(dr2, 2)),
        log_diagram(DiagramPointSet.from_diagram(rips2, 2)),
    )
    ok &= abs(gap2 - math.log(math.sqrt(6.0) / 2.0)) <= 0.01
    _report("worst-case hexagon/dodecahedron figures", ok)


def test_theorem_bound_histograms():
    ok = True
    circle_k1_max = None
    for kind in ("uniform-cube", "noisy-circle", "noisy-sphere"):
        for k in (1, 2):
            rows, summary = bound_histogram(kind, trials=200, n=30, k=k, seed=0)
            bound = math.log(jung_constant(k + 1))
            ok &= summary["max"] <= bound + 1e-9
            if kind == "noisy-circle" and k == 1:
                circle_k1_max = summary["max"]
            print(f"  {kind} k={k}: max={summary['max']:.4f} bound={bound:.4f}")
    ok &= circle_k1_max is not None
    ok &= circle_k1_max >= math.log(jung_constant(2)) - 0.05
    _report("log-bottleneck bound on 3x2x200 trials, circle approach", ok)


def test_ph0_identity():
    from delrips.complexes import build_rips

    ok = True
    clouds = [random_cloud(500 + i, 10 + 2 * i, 2 + i % 2) for i in range(12)]
    clouds.append(generate(InstanceSpec("hexagon-worst", eps=1e-3, seed=1)))
    clouds.append(generate(InstanceSpec("dodecahedron-worst", eps=1e-3, seed=1)))
    clouds.append(generate(InstanceSpec("noisy-circle", n=40, seed=2)))
    for cloud in clouds:
        result = compute_diagrams(cloud, keep_zero=True)
        rips0 = oracle.reduce(build_rips(cloud, 1))
        mine = sorted(t for t in result.diagram.multiset() if t[0] == 0)
        ref = sorted(t for t in rips0.multiset() if t[0] == 0)
        ok &= mine == ref
        finite = [t for t in mine if not math.isinf(t[2])]
        ok &= len(finite) == cloud.n - 1
        mst_values = sorted(result.mst.values().tolist()) if result.mst else []
        ok &= sorted(t[2] for t in finite) == mst_values
    _report("PH0(DR) = PH0(Rips), deaths = MST lengths, n-1 pairs", ok)


def test_lemma_suite_100_instances():
    ok = True
    rng = np.random.default_rng(606)
    for i in range(100):
        d = 2 if i % 2 == 0 else 3
        n = int(rng.integers(6, 22 if d == 3 else 30))
        cloud = random_cloud(7000 + i, n, d)
        result = compute_diagrams(cloud, keep_zero=True)
        fc = result.complex
        for k in range(1, d):
            stage = result.stages[k]
            ok &= not np.any(stage.msa.mask & ~stage.us.mask)  # MSA_k in US_k
            for p in stage.pairs:
                if not p.essential and p.death > p.birth:
                    _, rank = fc.index_of(p.birth_simplex)
                    ok &= bool(stage.us.mask[rank] and not stage.msa.mask[rank])
            deaths = sorted(
                p.death for p in result.stages[k - 1].pairs if not p.essential
            )
            ok &= sorted(stage.msa.values().tolist()) == deaths
        # positive PH1 births = UG \ MST exactly (distinct pairwise distances
        # hold almost surely for random clouds; cheap spot check via floats)
        d2 = np.einsum("ij,ij->i", *(2 * [
            cloud.points[fc.verts[1][:, 0]] - cloud.points[fc.verts[1][:, 1]]
        ]))
        if len(set(d2.tolist())) == len(d2):
            births = {
                p.birth_simplex
                for p in result.stages[1].pairs
                if not p.essential and p.death > p.birth
            }
            ug_minus_mst = {
                tuple(r)
                for r in fc.verts[1][result.ug.mask & ~result.mst.mask].tolist()
            }
            ok &= births == ug_minus_mst
        if n <= 16:
            for k in range(1, d):
                ok &= verify_spanning_acycle(k, result.stages[k].msa, fc)
    _report("lemma suite on 100 random instances", ok)


def test_stability_envelopes():
    rows, summaries = stability_sweep(
        "noisy-circle", trials=12, n=30, eps_grid=[0.001, 0.005, 0.02],
        k=1, sigma=0.01, seed=0,
    )
    ok = True
    for s in summaries:
        ok &= s["rips"]["max"] <= s["rips_bound"] + 1e-9
        ok &= s["delaunay_rips"]["max"] <= s["dr_bound_max"] + 1e-9
    ok &= any(s["instability_witnessed"] for s in summaries)
    _report("stability envelopes + witnessed instability", ok)


def test_jung_property_10k_simplices():
    rng = np.random.default_rng(11)
    ok = True
    for _ in range(10_000):
        k = int(rng.integers(1, 6))
        cloud = PointCloud(rng.standard_normal((k + 1, k)))
        idx = list(range(k + 1))
        delta = diameter(idx, cloud)
        two_meb = 2.0 * meb_radius(idx, cloud)
        theta = jung_constant(k)
        ok &= delta <= two_meb + 1e-9 <= theta * delta + 2e-9
    from delrips.experiments import _regular_simplex

    for k in range(1, 6):
        cloud = PointCloud(_regular_simplex(k))
        idx = list(range(k + 1))
        ok &= abs(
            2.0 * meb_radius(idx, cloud) - jung_constant(k) * diameter(idx, cloud)
        ) <= 1e-9
    _report("Jung property on 10^4 random simplices + regular equality", ok)


def test_determinism_and_parallel_consistency():
    ok = True
    a = generate(InstanceSpec("noisy-sphere", n=40, seed=12))
    b = generate(InstanceSpec("noisy-sphere", n=40, seed=12))
    ok &= np.array_equal(a.points, b.points)
    ok &= compute_diagrams(a).diagram.to_json() == compute_diagrams(b).diagram.to_json()
    rng = np.random.default_rng(404)
    for i in range(50):
        n = int(rng.integers(8, 28))
        d = 2 if i % 2 == 0 else 3
        cloud = PointCloud(rng.random((n, d)))
        seq = compute_diagrams(cloud, keep_zero=True, threads=1).diagram.multiset()
        par = compute_diagrams(cloud, keep_zero=True, threads=4).diagram.multiset()
        ok &= sorted(seq) == sorted(par)
    _report("fixed-seed determinism + parallel consistency on 50 instances", ok)


def test_performance_budget():
    cloud = PointCloud(np.random.default_rng(0).random((10_000, 3)))
    start = time.time()
    result = compute_diagrams(cloud, threads=1)
    elapsed = time.time() - start
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1e6
    ok = elapsed < 10.0 and peak_gb < 2.0
    ok = ok and len(result.diagram.points(0)) == 9_999
    print(f"  (n=10^4 in {elapsed:.2f}s, peak rss {peak_gb:.2f} GB)")
    _report("n=10^4 uniform R^3 diagrams in <10s and <2GB", ok)
