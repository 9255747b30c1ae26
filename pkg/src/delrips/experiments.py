"""Instance generators and the empirical bound/stability drivers.

The worst-case generators realize the tight configurations: a near-regular
polytope inscribed in the unit sphere with one vertex pulled radially
inward by eps, which forces a diametrical Delaunay edge, plus a tiny
seeded jitter (eps/1000) that restores general position without moving any
diagram value by more than a fraction of eps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, InternalError
from .geometry import PointCloud, jung_constant
from .metrics import DiagramPointSet, bottleneck, log_diagram, rips_diagram
from .persistence import compute_diagrams

KINDS = (
    "uniform-cube",
    "noisy-circle",
    "noisy-sphere",
    "hexagon-worst",
    "dodecahedron-worst",
    "antipodal-sphere-worst",
)


@dataclass(frozen=True)
class InstanceSpec:
    """A reproducible point-cloud recipe: deterministic in (kind, ..., seed)."""

    kind: str
    n: int = 50
    dim: int = 3
    noise: float = 0.05
    eps: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown instance kind {self.kind!r} (known: {KINDS})")
        if self.noise < 0 or self.eps < 0:
            raise InputError("noise and eps must be nonnegative")
        if self.n < 1:
            raise InputError("n must be positive")


def _unit_sphere(rng, n, dim):
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _dodecahedron_vertices():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    pts = []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                pts.append((sx, sy, sz))
    for a in (1, -1):
        for b in (1, -1):
            pts.append((0.0, a / phi, b * phi))
            pts.append((a / phi, b * phi, 0.0))
            pts.append((a * phi, 0.0, b / phi))
    arr = np.array(pts, dtype=float)
    return arr / math.sqrt(3.0)


def _regular_simplex(dim: int) -> np.ndarray:
    """dim+1 unit vectors in R^dim forming a regular simplex on the sphere."""
    basis = np.eye(dim + 1)
    centered = basis - basis.mean(axis=0)
    q, _ = np.linalg.qr(centered.T)
    proj = centered @ q[:, :dim]
    return proj / np.linalg.norm(proj, axis=1, keepdims=True)


def generate(spec: InstanceSpec) -> PointCloud:
    """Materialize an instance; identical output for identical spec."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "uniform-cube":
        return PointCloud(rng.random((spec.n, spec.dim)))
    if spec.kind == "noisy-circle":
        theta = rng.uniform(0.0, 2.0 * math.pi, spec.n)
        pts = np.stack(
            [np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=1
        )
        pts += rng.normal(0.0, spec.noise, pts.shape)
        return PointCloud(pts)
    if spec.kind == "noisy-sphere":
        pts = _unit_sphere(rng, spec.n, 3)
        pts += rng.normal(0.0, spec.noise, pts.shape)
        return PointCloud(pts)
    if spec.kind == "hexagon-worst":
        angles = np.arange(6) * (math.pi / 3.0)
        pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        pts[0] *= 1.0 - spec.eps
        pts += rng.uniform(-spec.eps / 1000.0, spec.eps / 1000.0, pts.shape)
        return PointCloud(pts)
    if spec.kind == "dodecahedron-worst":
        pts = _dodecahedron_vertices()
        pts[0] *= 1.0 - spec.eps
        pts += rng.uniform(-spec.eps / 1000.0, spec.eps / 1000.0, pts.shape)
        return PointCloud(pts)
    if spec.kind == "antipodal-sphere-worst":
        d = spec.dim  # sphere dimension; ambient is d+1
        ambient = d + 1
        anchor = np.zeros((2, ambient))
        anchor[0, 0] = 1.0
        anchor[1, 0] = -1.0
        simplex = (1.0 + spec.eps) * _regular_simplex(ambient)
        dense = (1.0 + spec.eps) * _unit_sphere(rng, spec.n, ambient)
        pts = np.vstack([anchor, simplex, dense])
        pts += rng.uniform(-spec.eps / 1000.0, spec.eps / 1000.0, pts.shape)
        return PointCloud(pts)
    raise InputError(f"unknown instance kind {spec.kind!r}")


def _quantiles(samples):
    arr = np.sort(np.asarray(samples, dtype=float))
    if arr.size == 0:
        return {}
    qs = {}
    for q in (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99):
        qs[f"q{int(q * 100):02d}"] = float(np.quantile(arr, q))
    qs["max"] = float(arr[-1])
    qs["min"] = float(arr[0])
    return qs


def bound_histogram(
    kind: str,
    trials: int,
    n: int,
    k: int,
    sigma: float = 0.05,
    seed: int = 0,
    backend: str = "auto",
):
    """Per-trial bottleneck distance between log Delaunay-Rips and log Rips
    diagrams in dimension k, with the Jung bound asserted on the maximum.

    Returns (rows, summary): rows are (seed, sigma, value) records, the
    summary carries quantiles, the bound, and the sample maximum.
    """
    if k < 1:
        raise InputError("bound histograms need k >= 1 (PH0 diagrams coincide)")
    bound = math.log(jung_constant(k + 1))
    rows = []
    samples = []
    for t in range(trials):
        spec = InstanceSpec(kind=kind, n=n, noise=sigma, seed=seed + t)
        cloud = generate(spec)
        dr = DiagramPointSet.from_diagram(
            compute_diagrams(cloud, backend=backend).diagram, k
        )
        rips = DiagramPointSet.from_diagram(rips_diagram(cloud, k + 1), k)
        value = bottleneck(log_diagram(dr), log_diagram(rips))
        if value < 0:
            raise InternalError("negative bottleneck distance")
        rows.append({"seed": seed + t, "sigma": sigma, "value": value})
        samples.append(value)
    summary = {
        "kind": kind,
        "trials": trials,
        "n": n,
        "k": k,
        "sigma": sigma,
        "bound": bound,
        **_quantiles(samples),
    }
    if samples and summary["max"] > bound + 1e-9:
        raise InternalError(
            f"log-bottleneck sample {summary['max']} exceeds the bound {bound}"
        )
    return rows, summary


def stability_sweep(
    kind: str,
    trials: int,
    n: int,
    eps_grid,
    k: int,
    sigma: float = 0.05,
    seed: int = 0,
    backend: str = "auto",
):
    """Bottleneck distance under bounded perturbations, Rips vs Delaunay-Rips.

    For each eps, Y perturbs X by at most eps/sqrt(d) per coordinate, so
    the Gromov-Hausdorff distance is at most eps.  Asserts the Rips samples
    against 2*eps and the Delaunay-Rips samples against the stability
    bound; reports whether any Delaunay-Rips sample exceeded 2*eps (the
    witnessed instability).
    """
    if k < 1:
        raise InputError("stability sweeps need k >= 1")
    theta = jung_constant(k + 1)
    rows = []
    summaries = []
    for ei, eps in enumerate(eps_grid):
        rips_samples, dr_samples, dr_bounds = [], [], []
        for t in range(trials):
            spec = InstanceSpec(kind=kind, n=n, noise=sigma, seed=seed + t)
            x = generate(spec)
            d = x.dim
            prng = np.random.default_rng([spec.seed, 7919, ei])
            delta = prng.uniform(-eps / math.sqrt(d), eps / math.sqrt(d), x.points.shape)
            y = PointCloud(x.points + delta)
            rips_x = rips_diagram(x, k + 1)
            rips_y = rips_diagram(y, k + 1)
            dr_x = compute_diagrams(x, backend=backend).diagram
            dr_y = compute_diagrams(y, backend=backend).diagram
            r_val = bottleneck(
                DiagramPointSet.from_diagram(rips_x, k),
                DiagramPointSet.from_diagram(rips_y, k),
            )
            d_val = bottleneck(
                DiagramPointSet.from_diagram(dr_x, k),
                DiagramPointSet.from_diagram(dr_y, k),
            )
            d_bound = (theta - 1.0) * max(x.diameter(), y.diameter()) + 2.0 * eps
            if r_val > 2.0 * eps + 1e-9:
                raise InternalError(
                    f"Rips stability violated: {r_val} > 2*{eps}"
                )
            if d_val > d_bound + 1e-9:
                raise InternalError(
                    f"Delaunay-Rips stability bound violated: {d_val} > {d_bound}"
                )
            rows.append(
                {"seed": spec.seed, "eps": eps, "filtration": "rips", "value": r_val}
            )
            rows.append(
                {"seed": spec.seed, "eps": eps, "filtration": "delaunay-rips",
                 "value": d_val, "bound": d_bound}
            )
            rips_samples.append(r_val)
            dr_samples.append(d_val)
            dr_bounds.append(d_bound)
        summaries.append(
            {
                "eps": eps,
                "k": k,
                "kind": kind,
                "rips": _quantiles(rips_samples),
                "delaunay_rips": _quantiles(dr_samples),
                "rips_bound": 2.0 * eps,
                "dr_bound_max": max(dr_bounds),
                "instability_witnessed": bool(
                    max(dr_samples) > 2.0 * eps + 1e-9 if dr_samples else False
                ),
            }
        )
    return rows, summaries


def stats_table(result) -> list:
    """Construction-size statistics per dimension, one row per k = 1..d.

    Row k reports the positive PH_(k-1) pair count, the number of k-cells
    used to compute it, |MSA_k|, |US_k|, |DEL^k| and the two ratios; for
    1 <= k <= d-2 it also records whether the Urquhart set computed against
    the full complex equals the one computed inside MSA_(k+1) (observed,
    not asserted).
    """
    from .spanning import urquhart_simplices

    complex = result.complex
    d = complex.top_dim
    rows = []
    for k in range(1, d + 1):
        stage_below = result.stages.get(k - 1)
        n_pos = len(
            [p for p in stage_below.pairs if not p.essential and p.death > p.birth]
        ) if stage_below else 0
        if k == 1:
            n_cells = result.mst.size if result.mst is not None else 0
        else:
            n_cells = stage_below.n_cells if stage_below else 0
        stage_k = result.stages.get(k)   # stage with us/msa of dimension k
        msa_k = stage_k.msa.size if stage_k and stage_k.msa is not None else None
        us_k = stage_k.us.size if stage_k and stage_k.us is not None else None
        if k == 1 and msa_k is None and result.mst is not None:
            msa_k = result.mst.size
        del_k = complex.size(k)
        row = {
            "k": k,
            "ph_pairs": n_pos,
            "cells": n_cells,
            "msa": msa_k,
            "us": us_k,
            "del": del_k,
            "cells_per_msa": (n_cells / msa_k) if msa_k else None,
            "cells_per_del": n_cells / del_k if del_k else None,
        }
        if 1 <= k <= d - 2:
            full_us = urquhart_simplices(k, complex)
            row["us_full"] = full_us.size
            if stage_k and stage_k.us is not None:
                row["us_context_equals_full"] = bool(
                    np.array_equal(full_us.mask, stage_k.us.mask)
                )
        rows.append(row)
    return rows


def rows_to_csv(rows) -> str:
    """CSV for trial rows: stable column order, one row per record."""
    if not rows:
        return ""
    fields = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
