"""Point clouds, metric quantities and general-position validation.

Filtration values everywhere downstream are simplex diameters (max pairwise
Euclidean distance); comparisons between diameters are done on squared
distances so that equal values are detected exactly in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import predicates
from .errors import InputError

#: Above this count of candidate subsets, validation switches to sampling.
VALIDATE_EXHAUSTIVE_BUDGET = 200_000


@dataclass(frozen=True)
class PointCloud:
    """n points in R^d with stable indices 0..n-1."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise InputError("point cloud must be a non-empty n x d array")
        if not np.all(np.isfinite(pts)):
            raise InputError("point cloud contains non-finite coordinates")
        dup = _find_duplicate(pts)
        if dup is not None:
            raise InputError(f"duplicate points at indices {dup[0]} and {dup[1]}")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def distance_sq(self, i: int, j: int) -> float:
        d = self.points[i] - self.points[j]
        return float(np.dot(d, d))

    def diameter(self) -> float:
        return diameter(range(self.n), self)

    @classmethod
    def from_text(cls, text: str) -> "PointCloud":
        """Parse the point-cloud text format: one point per line, whitespace
        separated decimals, '#' comments; dimension fixed by the first row."""
        rows = []
        dim = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            fields = stripped.split()
            try:
                coords = [float(f) for f in fields]
            except ValueError as exc:
                raise InputError(f"line {lineno}: {exc}") from None
            if dim is None:
                dim = len(coords)
            elif len(coords) != dim:
                raise InputError(
                    f"line {lineno}: expected {dim} coordinates, got {len(coords)}"
                )
            rows.append(coords)
        if not rows:
            raise InputError("no points found in input")
        return cls(np.array(rows, dtype=np.float64))

    @classmethod
    def load(cls, path) -> "PointCloud":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def to_text(self) -> str:
        return "\n".join(
            " ".join(repr(float(c)) for c in row) for row in self.points
        ) + "\n"


def _find_duplicate(pts):
    order = np.lexsort(pts.T[::-1])
    for a, b in zip(order[:-1], order[1:]):
        if np.array_equal(pts[a], pts[b]):
            return int(a), int(b)
    return None


def _check_indices(vertices, cloud):
    idx = [int(v) for v in vertices]
    if not idx:
        raise InputError("empty vertex list")
    for v in idx:
        if v < 0 or v >= cloud.n:
            raise InputError(f"point index {v} out of range 0..{cloud.n - 1}")
    return idx


def diameter_sq(vertices, cloud: PointCloud) -> float:
    """Max squared pairwise distance; the exact comparable for diameters."""
    idx = _check_indices(vertices, cloud)
    if len(idx) == 1:
        return 0.0
    pts = cloud.points[idx]
    best = 0.0
    for i in range(len(idx) - 1):
        d = pts[i + 1 :] - pts[i]
        m = float(np.max(np.einsum("ij,ij->i", d, d)))
        if m > best:
            best = m
    return best


def diameter(vertices, cloud: PointCloud) -> float:
    """Diameter of a vertex set: max pairwise Euclidean distance."""
    return math.sqrt(diameter_sq(vertices, cloud))


def jung_constant(d: int) -> float:
    """Tight ratio 2*meb/diameter for d-simplices: sqrt(2d/(d+1))."""
    if d < 0:
        raise InputError("dimension must be >= 0")
    return math.sqrt(2.0 * d / (d + 1.0))


def _solve(a, b):
    """Gaussian elimination with partial pivoting; returns None if singular."""
    k = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(k):
        piv = max(range(col, k), key=lambda r: abs(m[r][col]))
        if abs(m[piv][col]) < 1e-13:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = m[col][col]
        for r in range(k):
            if r != col and m[r][col] != 0.0:
                f = m[r][col] / inv
                for c in range(col, k + 1):
                    m[r][c] -= f * m[col][c]
    return [m[i][k] / m[i][i] for i in range(k)]


def _circumcenter(points):
    """Center equidistant from all points, within their affine hull."""
    p0 = points[0]
    vs = [[p - q for p, q in zip(pt, p0)] for pt in points[1:]]
    if not vs:
        return list(p0)
    gram = [[sum(x * y for x, y in zip(u, v)) for v in vs] for u in vs]
    rhs = [0.5 * sum(x * x for x in v) for v in vs]
    coef = _solve(gram, rhs)
    if coef is None:
        return None
    center = list(p0)
    for c, v in zip(coef, vs):
        for a in range(len(center)):
            center[a] += c * v[a]
    return center


def meb_radius(vertices, cloud: PointCloud) -> float:
    """Radius of the minimum enclosing ball of at most d+1 points.

    Exhaustive search over support subsets: each affinely independent subset
    contributes its circumsphere (center in the subset's affine hull); the
    smallest such ball enclosing every vertex is the minimum enclosing ball.
    """
    idx = _check_indices(vertices, cloud)
    if len(idx) > cloud.dim + 1:
        raise InputError(
            f"meb_radius expects at most d+1={cloud.dim + 1} vertices, got {len(idx)}"
        )
    pts = [list(map(float, cloud.points[i])) for i in idx]
    if len(pts) == 1:
        return 0.0
    best = None
    for size in range(2, len(pts) + 1):
        for sub in combinations(range(len(pts)), size):
            center = _circumcenter([pts[i] for i in sub])
            if center is None:
                continue
            r2 = sum((x - y) ** 2 for x, y in zip(center, pts[sub[0]]))
            if best is not None and r2 >= best:
                continue
            slack = 1e-12 * max(r2, 1e-300)
            if all(
                sum((x - y) ** 2 for x, y in zip(center, p)) <= r2 + slack
                for p in pts
            ):
                best = r2
    if best is None:
        raise InputError("could not determine enclosing ball (degenerate input)")
    return math.sqrt(best)


def in_sphere(simplex, query, cloud: PointCloud) -> str:
    """Exact position of a query point w.r.t. a d-simplex circumsphere.

    Returns "inside", "outside" or "on"; the simplex must consist of d+1
    affinely independent point indices.
    """
    sidx = _check_indices(simplex, cloud)
    (qidx,) = _check_indices([query], cloud)
    if len(sidx) != cloud.dim + 1:
        raise InputError(
            f"in_sphere expects d+1={cloud.dim + 1} simplex vertices, got {len(sidx)}"
        )
    sign = predicates.in_sphere([cloud.points[i] for i in sidx], cloud.points[qidx])
    return {predicates.INSIDE: "inside", predicates.OUTSIDE: "outside"}.get(sign, "on")


@dataclass
class GeneralPositionReport:
    """Outcome of validate_general_position."""

    cohyperplanar: list = field(default_factory=list)
    cospherical: list = field(default_factory=list)
    repeated_distances: list = field(default_factory=list)
    sampled: bool = False
    checked_subsets: int = 0

    @property
    def clean(self) -> bool:
        return not (self.cohyperplanar or self.cospherical or self.repeated_distances)

    def summary(self) -> str:
        lines = []
        mode = "sampled" if self.sampled else "exhaustive"
        lines.append(f"general position check ({mode}, {self.checked_subsets} subsets)")
        for tag, entries in (
            ("cohyperplanar", self.cohyperplanar),
            ("cospherical", self.cospherical),
        ):
            for subset in entries[:20]:
                lines.append(f"  violation: {tag} points {list(subset)}")
            if len(entries) > 20:
                lines.append(f"  ... {len(entries) - 20} more {tag} violations")
        for dist, pairs in self.repeated_distances[:20]:
            lines.append(
                f"  violation: distance {dist} repeated {len(pairs)} times {pairs}"
            )
        if len(self.repeated_distances) > 20:
            lines.append(
                f"  ... {len(self.repeated_distances) - 20} more repeated distances"
            )
        if self.clean:
            lines.append("  clean")
        return "\n".join(lines)


def validate_general_position(cloud: PointCloud, rng_seed: int = 0) -> GeneralPositionReport:
    """Check the general-position assumptions behind the Delaunay pipeline.

    Reports (a) d+1 points on a common hyperplane, (b) d+2 cospherical
    points, (c) repeated pairwise distances (detected as exactly equal
    squared distances).  Exhaustive for small inputs, sampled above
    VALIDATE_EXHAUSTIVE_BUDGET candidate subsets.
    """
    report = GeneralPositionReport()
    n, d = cloud.n, cloud.dim
    pts = cloud.points

    # repeated pairwise distances, exact on squared values
    seen = {}
    for i in range(n - 1):
        diff = pts[i + 1 :] - pts[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        for j, v in enumerate(d2, start=i + 1):
            seen.setdefault(float(v), []).append((i, j))
    for v, pairs in sorted(seen.items()):
        if len(pairs) > 1:
            report.repeated_distances.append((math.sqrt(v), pairs))

    rng = np.random.default_rng(rng_seed)

    def subsets(size):
        total = math.comb(n, size)
        if total <= VALIDATE_EXHAUSTIVE_BUDGET:
            return combinations(range(n), size), total
        report.sampled = True
        draws = VALIDATE_EXHAUSTIVE_BUDGET // 10

        def sampler():
            for _ in range(draws):
                yield tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))

        return sampler(), draws

    if n >= d + 1:
        it, count = subsets(d + 1)
        report.checked_subsets += count
        for sub in it:
            if predicates.orient([pts[i] for i in sub]) == 0:
                report.cohyperplanar.append(sub)
    if n >= d + 2:
        it, count = subsets(d + 2)
        report.checked_subsets += count
        for sub in it:
            simplex = [pts[i] for i in sub[:-1]]
            if predicates.orient(simplex) == 0:
                continue  # already reported as cohyperplanar
            if predicates.in_sphere_sign(simplex, pts[sub[-1]]) == 0:
                report.cospherical.append(sub)
    return report
