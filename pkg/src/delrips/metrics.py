"""Exact bottleneck distance and the approximation/stability bound checks.

The bottleneck distance is computed exactly: the optimum is one of the
pairwise l-infinity costs or half-persistences, so a binary search over the
sorted candidate values with a perfect-matching feasibility test at each
step yields the smallest feasible cost.  Feasibility uses the classic
square bipartite graph in which each diagram point may match its own
diagonal projection and diagonal copies match each other freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .complexes import build_rips
from .diagram import PersistenceDiagram
from .errors import InputError
from .geometry import PointCloud, jung_constant
from . import oracle
from .persistence import compute_diagrams


@dataclass(frozen=True)
class DiagramPointSet:
    """Finite off-diagonal points plus essential births of one dimension."""

    points: tuple
    essential: tuple = ()

    def __post_init__(self):
        for b, d in self.points:
            if not d > b:
                raise InputError(f"diagram point ({b}, {d}) not above the diagonal")

    @classmethod
    def from_diagram(cls, diagram: PersistenceDiagram, dim: int) -> "DiagramPointSet":
        pts = tuple(
            (p.birth, p.death) for p in diagram.finite_pairs(dim, keep_zero=False)
        )
        ess = tuple(p.birth for p in diagram.essential_pairs(dim))
        return cls(pts, ess)

    @property
    def size(self) -> int:
        return len(self.points)


def log_diagram(ps: DiagramPointSet) -> DiagramPointSet:
    """Coordinate-wise natural log; births must be positive (never PH0)."""
    for b, _ in ps.points:
        if b <= 0.0:
            raise InputError(
                f"log diagram needs strictly positive births, got {b}"
            )
    for b in ps.essential:
        if b <= 0.0:
            raise InputError(
                f"log diagram needs strictly positive essential births, got {b}"
            )
    pts = tuple((math.log(b), math.log(d)) for b, d in ps.points)
    ess = tuple(math.log(b) for b in ps.essential)
    return DiagramPointSet(pts, ess)


def _feasible(cost, pers_a, pers_b, t):
    """Perfect matching at threshold t in the augmented bipartite graph.

    Rows: points of A then diagonal copies of B's points; columns: points
    of B then diagonal copies of A's points.  A real point may match a real
    point within cost t or its own projection within half its persistence;
    diagonal copies match each other at cost 0.
    """
    n1, n2 = len(pers_a), len(pers_b)
    size = n1 + n2
    if size == 0:
        return True
    grid = np.zeros((size, size), dtype=bool)
    if n1 and n2:
        grid[:n1, :n2] = cost <= t
    if n1:
        grid[np.arange(n1), n2 + np.arange(n1)] = pers_a * 0.5 <= t
    if n2:
        grid[n1 + np.arange(n2), np.arange(n2)] = pers_b * 0.5 <= t
    grid[n1:, n2:] = True
    matching = maximum_bipartite_matching(csr_matrix(grid), perm_type="column")
    return not np.any(matching == -1)


def bottleneck(a: DiagramPointSet, b: DiagramPointSet) -> float:
    """Exact bottleneck distance; +inf when essential counts differ."""
    if len(a.essential) != len(b.essential):
        return math.inf
    ess = 0.0
    if a.essential:
        for x, y in zip(sorted(a.essential), sorted(b.essential)):
            ess = max(ess, abs(x - y))

    pa = np.array([d - bb for bb, d in a.points])
    pb = np.array([d - bb for bb, d in b.points])
    if a.points and b.points:
        ax = np.array(a.points)
        bx = np.array(b.points)
        cost = np.abs(ax[:, None, :] - bx[None, :, :]).max(axis=2)
    else:
        cost = np.zeros((len(a.points), len(b.points)))
    candidates = {0.0}
    candidates.update(float(x) for x in cost.ravel())
    candidates.update(float(x) * 0.5 for x in pa)
    candidates.update(float(x) * 0.5 for x in pb)
    values = sorted(candidates)
    lo, hi = 0, len(values) - 1
    if not _feasible(cost, pa, pb, values[hi]):
        raise InputError("bottleneck: no feasible matching at the largest cost")
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(cost, pa, pb, values[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(values[lo], ess)


@dataclass
class BoundReport:
    """Measured gaps against the three theoretical envelopes."""

    k: int
    log_gap: float
    log_bound: float
    raw_gap: float
    raw_bound: float
    cross_gap: float | None = None
    cross_bound: float | None = None

    @property
    def log_slack(self) -> float:
        return self.log_bound - self.log_gap

    @property
    def raw_slack(self) -> float:
        return self.raw_bound - self.raw_gap

    @property
    def cross_slack(self) -> float | None:
        if self.cross_gap is None:
            return None
        return self.cross_bound - self.cross_gap

    def to_json_obj(self):
        obj = {
            "k": self.k,
            "log_gap": self.log_gap,
            "log_bound": self.log_bound,
            "log_slack": self.log_slack,
            "raw_gap": self.raw_gap,
            "raw_bound": self.raw_bound,
            "raw_slack": self.raw_slack,
        }
        if self.cross_gap is not None:
            obj.update(
                cross_gap=self.cross_gap,
                cross_bound=self.cross_bound,
                cross_slack=self.cross_slack,
            )
        return obj


def delaunay_rips_diagram(cloud: PointCloud, backend="auto", perturb=False):
    return compute_diagrams(cloud, backend=backend, perturb=perturb).diagram


def rips_diagram(cloud: PointCloud, max_dim: int) -> PersistenceDiagram:
    """Rips persistence through the boundary-matrix oracle."""
    return oracle.reduce(build_rips(cloud, max_dim)).drop_zero()


def check_bounds(
    cloud: PointCloud,
    cloud2: PointCloud | None = None,
    k: int = 1,
    eps: float | None = None,
    backend: str = "auto",
    perturb: bool = False,
) -> BoundReport:
    """Measure the log/raw gaps between Delaunay-Rips and Rips diagrams of
    one cloud against their Jung-constant bounds and, given a second cloud
    with a known l-infinity perturbation bound eps (so that twice the
    Gromov-Hausdorff distance is at most 2*eps), the cross-cloud stability
    bound."""
    if k < 1:
        raise InputError("bound checks apply to homology dimension k >= 1")
    theta = jung_constant(k + 1)
    dr = DiagramPointSet.from_diagram(
        delaunay_rips_diagram(cloud, backend, perturb), k
    )
    rips = DiagramPointSet.from_diagram(rips_diagram(cloud, k + 1), k)
    log_gap = bottleneck(log_diagram(dr), log_diagram(rips))
    raw_gap = bottleneck(dr, rips)
    diam = cloud.diameter()
    report = BoundReport(
        k=k,
        log_gap=log_gap,
        log_bound=math.log(theta),
        raw_gap=raw_gap,
        raw_bound=(theta - 1.0) * diam,
    )
    if cloud2 is not None:
        if eps is None:
            raise InputError("cross-cloud check needs the perturbation bound eps")
        dr2 = DiagramPointSet.from_diagram(
            delaunay_rips_diagram(cloud2, backend, perturb), k
        )
        report.cross_gap = bottleneck(dr, dr2)
        report.cross_bound = (theta - 1.0) * max(diam, cloud2.diameter()) + 2.0 * eps
    return report
