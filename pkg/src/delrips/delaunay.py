"""Delaunay complex construction.

Three backends behind one entry point:

- "incremental": randomized incremental insertion with a visibility walk and
  an explicit infinite vertex, using the filtered-exact predicates.  The
  reference construction for d = 2 and d = 3.
- "brute": enumeration of all candidate d-simplices with empty-circumsphere
  verification, vectorized with an exact fallback on ambiguous signs.  Used
  for 4 <= d <= 6 at small n and as a cross-check oracle for d = 2, 3.
- "qhull": scipy.spatial.Delaunay, for large generic inputs where the exact
  backends are too slow; cross-validated against the exact backends in the
  test suite.

Exact cospherical ties raise DegeneracyError unless symbolic perturbation is
enabled, in which case they are broken by point index (weight perturbation).
Exact cohyperplanar configurations always raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import predicates
from .errors import DegeneracyError, InputError, InternalError, ResourceError, UnsupportedError
from .geometry import PointCloud

INF = -1  # virtual vertex closing the hull in the incremental backend

QHULL_AUTO_THRESHOLD = 400        # incremental below, qhull above (d <= 3)
BRUTE_BUDGET = 4_000_000          # max candidate x query pairs for "brute"


@dataclass
class DelaunayComplex:
    """All simplices of DEL(X), derived from its top-dimensional cells."""

    cloud: PointCloud
    top: np.ndarray  # (m, d+1) sorted vertex rows, lexicographically ordered
    backend: str
    _skeleta: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.top.shape[1] - 1

    def simplices(self, k: int) -> np.ndarray:
        """Unique k-simplices as a (m_k, k+1) array of sorted vertex rows."""
        if k < 0 or k > self.dim:
            raise InputError(f"dimension {k} out of range 0..{self.dim}")
        if k == self.dim:
            return self.top
        if k == 0:
            return np.arange(self.cloud.n, dtype=np.int64).reshape(-1, 1)
        if k not in self._skeleta:
            faces = _faces_of(self.top, k)
            self._skeleta[k] = np.unique(faces, axis=0)
        return self._skeleta[k]

    def counts(self) -> list[int]:
        return [int(self.simplices(k).shape[0]) for k in range(self.dim + 1)]

    def facet_cofacet_degrees(self) -> np.ndarray:
        """Number of top cofacets of each (d-1)-simplex (1 = hull facet)."""
        facets = self.simplices(self.dim - 1)
        all_facets = _faces_of(self.top, self.dim - 1)
        idx = _row_index(facets, all_facets)
        return np.bincount(idx, minlength=facets.shape[0])

    def euler_characteristic(self) -> int:
        return int(sum((-1) ** k * c for k, c in enumerate(self.counts())))


def _faces_of(simplices: np.ndarray, k: int) -> np.ndarray:
    """All k-faces (with repetition) of the given rows of sorted vertices."""
    dim = simplices.shape[1] - 1
    cols = list(range(dim + 1))
    parts = [simplices[:, list(sub)] for sub in combinations(cols, k + 1)]
    return np.concatenate(parts, axis=0)


def _row_index(table: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of each query row in a table of unique sorted rows."""
    if table.shape[0] == 0:
        raise InternalError("empty row table")
    void_t = np.ascontiguousarray(table).view(
        np.dtype((np.void, table.dtype.itemsize * table.shape[1]))
    ).ravel()
    void_q = np.ascontiguousarray(queries).view(
        np.dtype((np.void, queries.dtype.itemsize * queries.shape[1]))
    ).ravel()
    order = np.argsort(void_t)
    pos = np.searchsorted(void_t[order], void_q)
    if np.any(pos >= len(order)) or np.any(void_t[order][pos] != void_q):
        raise InternalError("query row missing from table")
    return order[pos]


def delaunay_complex(
    cloud: PointCloud,
    backend: str = "auto",
    perturb: bool = False,
    seed: int = 20240601,
) -> DelaunayComplex:
    """Build DEL(X) for 1 <= d <= 6.

    backend "auto" picks the exact incremental construction for d <= 3 at
    small n, the exact brute-force enumeration for 4 <= d <= 6 at small n,
    and qhull for large inputs.
    """
    n, d = cloud.n, cloud.dim
    if d >= 7:
        raise UnsupportedError(f"ambient dimension {d} not supported (max 6)")
    if n < d + 1:
        raise InputError(f"need at least d+1={d + 1} points for Delaunay in R^{d}, got {n}")
    if d == 1:
        order = np.argsort(cloud.points[:, 0], kind="stable")
        coords = cloud.points[order, 0]
        if np.any(np.diff(coords) == 0.0):
            raise InputError("duplicate coordinates on the line")
        edges = np.sort(np.stack([order[:-1], order[1:]], axis=1), axis=1)
        top = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
        return DelaunayComplex(cloud, top.astype(np.int64), "line")

    if backend == "auto":
        if d <= 3:
            backend = "incremental" if n <= QHULL_AUTO_THRESHOLD else "qhull"
        else:
            pairs = math.comb(n, d + 1) * max(n - d - 1, 1)
            backend = "brute" if pairs <= BRUTE_BUDGET else "qhull"

    if backend == "incremental":
        top = _incremental(cloud, perturb=perturb, seed=seed)
    elif backend == "brute":
        top = _brute_force(cloud, perturb=perturb)
    elif backend == "qhull":
        top = _qhull(cloud)
    else:
        raise InputError(f"unknown Delaunay backend {backend!r}")

    top = np.asarray(sorted(map(tuple, top)), dtype=np.int64)
    if top.ndim != 2 or top.shape[1] != d + 1:
        raise InternalError("malformed triangulation output")
    return DelaunayComplex(cloud, top, backend)


# ---------------------------------------------------------------------------
# incremental backend


class _Triangulation:
    def __init__(self, cloud, perturb):
        self.pts = cloud.points
        self.perturb = perturb
        self.cells = {}          # id -> sorted vertex tuple (may contain INF)
        self.facet_map = {}      # sorted facet tuple -> set of cell ids
        self.next_id = 0
        self.last_finite = None

    def add_cell(self, verts):
        cid = self.next_id
        self.next_id += 1
        self.cells[cid] = verts
        for f in combinations(verts, len(verts) - 1):
            self.facet_map.setdefault(f, set()).add(cid)
        if INF not in verts:
            self.last_finite = cid
        return cid

    def remove_cell(self, cid):
        verts = self.cells.pop(cid)
        for f in combinations(verts, len(verts) - 1):
            owners = self.facet_map[f]
            owners.discard(cid)
            if not owners:
                del self.facet_map[f]

    def neighbors(self, cid):
        verts = self.cells[cid]
        for f in combinations(verts, len(verts) - 1):
            for other in self.facet_map[f]:
                if other != cid:
                    yield f, other

    def _in_sphere(self, verts, q):
        pts = [self.pts[v] for v in verts]
        if self.perturb:
            return predicates.in_sphere_perturbed(pts, verts, self.pts[q], q)
        sign = predicates.in_sphere(pts, self.pts[q])
        if sign == predicates.ON:
            raise DegeneracyError(
                f"points {list(verts)} and {q} are exactly cospherical "
                "(enable symbolic perturbation to break ties by index)",
                list(verts) + [q],
            )
        return sign

    def conflicts(self, cid, q):
        verts = self.cells[cid]
        if INF not in verts:
            return self._in_sphere(verts, q) == predicates.INSIDE
        facet = tuple(v for v in verts if v != INF)
        finite_neighbor = None
        for other in self.facet_map[facet]:
            if other != cid:
                finite_neighbor = other
        if finite_neighbor is None:
            raise InternalError("hull facet without finite cell")
        opp = [v for v in self.cells[finite_neighbor] if v not in facet]
        if len(opp) != 1:
            raise InternalError("bad finite neighbor across hull facet")
        fpts = [self.pts[v] for v in facet]
        s_in = predicates.orient(fpts + [self.pts[opp[0]]])
        s_q = predicates.orient(fpts + [self.pts[q]])
        if s_q == 0:
            raise DegeneracyError(
                f"point {q} lies on the hyperplane of hull facet {list(facet)}",
                list(facet) + [q],
            )
        return s_q == -s_in

    def locate_conflict(self, q, rng):
        """Visibility walk to a cell in conflict with q."""
        cid = self.last_finite
        steps = 0
        limit = 20 * (len(self.cells) + 10)
        while steps < limit:
            steps += 1
            verts = self.cells[cid]
            if INF in verts:
                if self.conflicts(cid, q):
                    return cid
                # step back inside through the finite facet
                facet = tuple(v for v in verts if v != INF)
                for other in self.facet_map[facet]:
                    if other != cid:
                        cid = other
                        break
                continue
            moved = False
            on_hyperplane = None
            idxs = list(range(len(verts)))
            rng.shuffle(idxs)
            for i in idxs:
                v = verts[i]
                facet = tuple(x for x in verts if x != v)
                fpts = [self.pts[x] for x in facet]
                s_q = predicates.orient(fpts + [self.pts[q]])
                if s_q == 0:
                    # incidental cohyperplanarity with a facet we are not
                    # crossing is harmless; it only obstructs insertion when
                    # q ends up on the boundary of its containing cell
                    on_hyperplane = facet
                    continue
                s_v = predicates.orient(fpts + [self.pts[v]])
                if s_q == -s_v:
                    for other in self.facet_map[facet]:
                        if other != cid:
                            cid = other
                            moved = True
                            break
                    if moved:
                        break
            if not moved:
                if on_hyperplane is not None:
                    raise DegeneracyError(
                        f"point {q} lies on the hyperplane of facet "
                        f"{list(on_hyperplane)} of its containing cell",
                        list(on_hyperplane) + [q],
                    )
                return cid  # q strictly inside this cell, hence in conflict
        # safety net: exhaustive scan (cannot loop forever on valid input)
        for cid in self.cells:
            if self.conflicts(cid, q):
                return cid
        raise InternalError("point location failed")

    def insert(self, q, rng):
        seed_cell = self.locate_conflict(q, rng)
        if not self.conflicts(seed_cell, q):
            raise InternalError("located cell not in conflict")
        region = {seed_cell}
        stack = [seed_cell]
        while stack:
            cid = stack.pop()
            for _, other in list(self.neighbors(cid)):
                if other not in region and self.conflicts(other, q):
                    region.add(other)
                    stack.append(other)
        boundary = []
        for cid in region:
            verts = self.cells[cid]
            for f in combinations(verts, len(verts) - 1):
                owners = self.facet_map[f]
                if len(owners) != 2:
                    raise InternalError("triangulation facet without two cofacets")
                if any(o not in region for o in owners):
                    boundary.append(f)
        for cid in region:
            self.remove_cell(cid)
        for f in boundary:
            self.add_cell(tuple(sorted(f + (q,))))


def _independent_seed(pts, order):
    """First d+1 points of `order` spanning full affine dimension, exactly."""
    d = pts.shape[1]
    chosen = [order[0]]
    basis = []
    for idx in order[1:]:
        vec = [Fraction(float(x)) for x in (pts[idx] - pts[chosen[0]])]
        cand = basis + [vec]
        if _rational_rank(cand) == len(cand):
            basis = cand
            chosen.append(idx)
            if len(chosen) == d + 1:
                return chosen
    raise InputError(
        "points lie in a lower-dimensional affine subspace; Delaunay rejected"
    )


def _rational_rank(rows):
    m = [row[:] for row in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    row = 0
    for col in range(ncols):
        piv = None
        for r in range(row, len(m)):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = m[row][col]
        for r in range(row + 1, len(m)):
            if m[r][col] != 0:
                f = m[r][col] / inv
                for c in range(col, ncols):
                    m[r][c] -= f * m[row][c]
        row += 1
        rank += 1
    return rank


def _incremental(cloud, perturb, seed):
    pts = cloud.points
    n, d = cloud.n, cloud.dim
    rng = np.random.default_rng(seed)
    order = list(range(n))
    rng.shuffle(order)
    seed_verts = _independent_seed(pts, order)

    tri = _Triangulation(cloud, perturb)
    first = tuple(sorted(seed_verts))
    tri.add_cell(first)
    for f in combinations(first, d):
        tri.add_cell(tuple(sorted(f + (INF,))))

    walk_rng = np.random.default_rng(seed + 1)
    used = set(seed_verts)
    for q in order:
        if q in used:
            continue
        tri.insert(q, walk_rng)

    finite = [v for v in tri.cells.values() if INF not in v]
    if not finite:
        raise InternalError("triangulation lost all finite cells")
    return finite


# ---------------------------------------------------------------------------
# brute-force backend


def _brute_force(cloud, perturb):
    pts = cloud.points
    n, d = cloud.n, cloud.dim
    cand = np.array(list(combinations(range(n), d + 1)), dtype=np.int64)
    m = cand.shape[0]
    if m * max(n - d - 1, 1) > BRUTE_BUDGET:
        raise ResourceError(
            f"brute-force Delaunay budget exceeded for n={n}, d={d}; "
            "use the qhull backend"
        )

    base = pts[cand[:, 0]][:, None, :]
    rows = pts[cand[:, 1:]] - base  # (m, d, d)
    dets = np.linalg.det(rows)
    scale = np.maximum(np.abs(rows).sum(axis=2).prod(axis=1), 1e-300)
    orient_signs = np.zeros(m, dtype=np.int64)
    sure = np.abs(dets) > 1e-9 * scale
    orient_signs[sure] = np.sign(dets[sure]).astype(np.int64)
    for i in np.nonzero(~sure)[0]:
        s = predicates.orient([pts[v] for v in cand[i]])
        if s == 0:
            raise DegeneracyError(
                f"points {cand[i].tolist()} are exactly cohyperplanar",
                cand[i].tolist(),
            )
        orient_signs[i] = s

    accepted = []
    member_mask = np.zeros((m, n), dtype=bool)
    np.put_along_axis(member_mask, cand, True, axis=1)
    # lifted in-sphere determinants for all (candidate, query) pairs
    rel = pts[cand][:, None, :, :] - pts[None, :, None, :]  # (m, n, d+1, d)
    lift = np.concatenate([rel, (rel * rel).sum(axis=3, keepdims=True)], axis=3)
    dets_q = np.linalg.det(lift)  # (m, n)
    mags = np.maximum(np.abs(lift).sum(axis=3).prod(axis=2), 1e-300)
    parity = 1 if d % 2 == 0 else -1
    signed = parity * dets_q * orient_signs[:, None]
    inside = signed > 1e-9 * mags
    outside = signed < -1e-9 * mags
    ambiguous = ~(inside | outside) & ~member_mask

    for i in range(m):
        ok = True
        for j in np.nonzero(ambiguous[i])[0]:
            spts = [pts[v] for v in cand[i]]
            if perturb:
                s = predicates.in_sphere_perturbed(spts, cand[i].tolist(), pts[j], int(j))
            else:
                s = predicates.in_sphere(spts, pts[j])
                if s == predicates.ON:
                    raise DegeneracyError(
                        f"points {cand[i].tolist()} and {j} are exactly cospherical "
                        "(enable symbolic perturbation to break ties by index)",
                        cand[i].tolist() + [int(j)],
                    )
            if s == predicates.INSIDE:
                ok = False
                break
        if ok and not np.any(inside[i] & ~member_mask[i]):
            accepted.append(tuple(int(v) for v in cand[i]))
    return accepted


# ---------------------------------------------------------------------------
# qhull backend


def _qhull(cloud):
    from scipy.spatial import Delaunay as SciPyDelaunay
    from scipy.spatial import QhullError

    try:
        tri = SciPyDelaunay(cloud.points)
    except QhullError as exc:
        raise DegeneracyError(f"qhull failed: {exc}") from exc
    top = np.sort(tri.simplices.astype(np.int64), axis=1)
    return np.unique(top, axis=0)
