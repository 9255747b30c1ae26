"""Simplex ordering and filtered complexes.

The recursive total order on k-simplices extends the diameter partial
order: edges compare by (squared length, lexicographic vertex pair), higher
simplices by (order of their maximal facet, lexicographic vertex tuple).
Squared lengths are compared, never square roots, so equal diameters are
detected exactly; displayed filtration values are square roots propagated
from edges, which keeps them bit-identical across every construction that
shares the same point cloud.

A FilteredComplex stores each dimension in order-rank position, so a
simplex's per-dimension index *is* its rank and the maximal facet of a
simplex is simply the largest facet index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .delaunay import DelaunayComplex, delaunay_complex, _row_index
from .errors import ContractError, InputError, ResourceError
from .geometry import PointCloud

RIPS_BUDGET = 10_000_000


def as_simplex(vertices) -> tuple:
    verts = tuple(int(v) for v in vertices)
    if len(set(verts)) != len(verts):
        raise InputError(f"simplex has repeated vertices: {verts}")
    if any(v < 0 for v in verts):
        raise InputError(f"simplex has negative vertex index: {verts}")
    return tuple(sorted(verts))


def order_key(simplex, cloud: PointCloud, _memo=None):
    """Comparable key realizing the recursive total order (reference path).

    Edges map to (squared diameter, vertex pair); a k-simplex maps to
    (key of its maximal facet, vertex tuple).  Tuples compare
    lexicographically, so the recursion is the order itself.
    """
    verts = as_simplex(simplex)
    if len(verts) < 2:
        raise ContractError("order is defined for simplices of dimension >= 1")
    if _memo is None:
        _memo = {}
    return _order_key(verts, cloud, _memo)


def _order_key(verts, cloud, memo):
    got = memo.get(verts)
    if got is not None:
        return got
    if len(verts) == 2:
        key = (cloud.distance_sq(verts[0], verts[1]), verts)
    else:
        best = None
        for i in range(len(verts)):
            facet = verts[:i] + verts[i + 1 :]
            fk = _order_key(facet, cloud, memo)
            if best is None or fk > best:
                best = fk
        key = (best, verts)
    memo[verts] = key
    return key


def compare(a, b, cloud: PointCloud) -> str:
    """Strict comparison of two distinct same-dimension simplices."""
    sa, sb = as_simplex(a), as_simplex(b)
    if len(sa) != len(sb):
        raise ContractError("compared simplices must have equal dimension")
    if sa == sb:
        raise ContractError("compared simplices must be distinct")
    memo = {}
    return "less" if _order_key(sa, cloud, memo) < _order_key(sb, cloud, memo) else "greater"


def max_facet(simplex, cloud: PointCloud) -> tuple:
    """The facet that is maximal in the recursive order."""
    verts = as_simplex(simplex)
    if len(verts) < 2:
        raise ContractError("max_facet needs dimension >= 1")
    if len(verts) == 2:
        return (verts[1],)
    memo = {}
    facets = [verts[:i] + verts[i + 1 :] for i in range(len(verts))]
    return max(facets, key=lambda f: _order_key(f, cloud, memo))


@dataclass
class FilteredComplex:
    """A diameter-filtered complex with per-dimension rank ordering.

    For each dimension k: verts[k] is an (m_k, k+1) array of sorted vertex
    rows stored in rank order, value[k] the diameter, facets[k] (k >= 1)
    indexes into dimension k-1, and grank[k] is the global filtration rank
    by (value, dimension, rank).
    """

    cloud: PointCloud
    verts: list
    value: list
    deltasq: list
    facets: list
    grank: list
    delaunay: DelaunayComplex | None = None
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def top_dim(self) -> int:
        return len(self.verts) - 1

    def size(self, k: int) -> int:
        return self.verts[k].shape[0] if 0 <= k <= self.top_dim else 0

    @property
    def total(self) -> int:
        return sum(v.shape[0] for v in self.verts)

    def max_facet_of(self, k: int) -> np.ndarray:
        """Rank of the maximal facet of every k-simplex (k >= 2)."""
        if k < 2:
            raise ContractError("max facets tracked for dimension >= 2")
        return self.facets[k].max(axis=1)

    def index_of(self, simplex) -> tuple:
        """(dimension, rank) of a vertex-tuple simplex."""
        verts = as_simplex(simplex)
        k = len(verts) - 1
        if k not in self._index:
            self._index[k] = {tuple(row): i for i, row in enumerate(self.verts[k].tolist())}
        got = self._index[k].get(verts)
        if got is None:
            raise InputError(f"simplex {verts} not in complex")
        return k, got

    def simplex(self, k: int, rank: int) -> tuple:
        return tuple(self.verts[k][rank].tolist())

    def cofacet_table(self, k: int, context=None):
        """Cofacet lists of k-simplices within dimension k+1 (or a subset).

        Returns (counts, indptr, flat cofacet ranks) in CSR form; `context`
        restricts to the given (k+1)-ranks.
        """
        if k + 1 > self.top_dim:
            raise ContractError("no cofacet dimension available")
        fac = self.facets[k + 1]
        rows = np.arange(fac.shape[0], dtype=np.int64)
        if context is not None:
            fac = fac[context]
            rows = np.asarray(context, dtype=np.int64)
        flat = fac.ravel()
        owners = np.repeat(rows, fac.shape[1])
        order = np.argsort(flat, kind="stable")
        flat_sorted = flat[order]
        owners_sorted = owners[order]
        counts = np.bincount(flat_sorted, minlength=self.size(k))
        indptr = np.concatenate([[0], np.cumsum(counts)])
        return counts, indptr, owners_sorted

    def entries(self):
        """Flat (grank, dim, value, verts-tuple) list in global rank order."""
        out = [None] * self.total
        for k in range(self.top_dim + 1):
            vals = self.value[k]
            gr = self.grank[k]
            for i, row in enumerate(self.verts[k].tolist()):
                out[gr[i]] = (int(gr[i]), k, float(vals[i]), tuple(row))
        return out

    def dump(self) -> str:
        """Debug dump: one simplex per line, `dim rank value v0 ... vk`."""
        lines = []
        for rank, k, val, verts in self.entries():
            lines.append(f"{k} {rank} {val!r} " + " ".join(str(v) for v in verts))
        return "\n".join(lines) + "\n"


def parse_dump(text: str):
    """Parse the dump format back into (rank, dim, value, verts) entries."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        try:
            k = int(parts[0])
            rank = int(parts[1])
            value = float(parts[2])
            verts = tuple(int(v) for v in parts[3:])
        except (ValueError, IndexError) as exc:
            raise InputError(f"dump line {lineno}: {exc}") from None
        if len(verts) != k + 1:
            raise InputError(f"dump line {lineno}: dimension/vertex mismatch")
        entries.append((rank, k, value, verts))
    entries.sort()
    if [e[0] for e in entries] != list(range(len(entries))):
        raise InputError("dump ranks are not a permutation of 0..N-1")
    return entries


def _edge_deltasq(cloud, edges):
    diff = cloud.points[edges[:, 0]] - cloud.points[edges[:, 1]]
    return np.einsum("ij,ij->i", diff, diff)


def build_filtered(cloud: PointCloud, simplices_by_dim: dict, delaunay=None) -> FilteredComplex:
    """Assemble a FilteredComplex from sorted-vertex simplex arrays."""
    top = max(simplices_by_dim)
    verts, value, deltasq, facets, grank = [], [], [], [], []
    for k in range(top + 1):
        if k not in simplices_by_dim or simplices_by_dim[k].shape[0] == 0:
            raise InputError(f"missing simplices of dimension {k}")
        rows = np.asarray(simplices_by_dim[k], dtype=np.int64)
        if k == 0:
            verts.append(rows)
            value.append(np.zeros(rows.shape[0]))
            deltasq.append(np.zeros(rows.shape[0]))
            facets.append(None)
            continue
        if k == 1:
            d2 = _edge_deltasq(cloud, rows)
            order = np.lexsort((rows[:, 1], rows[:, 0], d2))
            rows = rows[order]
            d2 = d2[order]
            verts.append(rows)
            deltasq.append(d2)
            value.append(np.sqrt(d2))
            fac = rows.copy()  # facet rank of a vertex is its index
            facets.append(fac)
            continue
        fac_cols = []
        for drop in range(k + 1):
            keep = [c for c in range(k + 1) if c != drop]
            fac_cols.append(_row_index(verts[k - 1], rows[:, keep]))
        fac = np.stack(fac_cols, axis=1)
        mf = fac.max(axis=1)
        order = np.lexsort(tuple(rows[:, c] for c in range(k, -1, -1)) + (mf,))
        rows = rows[order]
        fac = fac[order]
        mf = mf[order]
        verts.append(rows)
        facets.append(fac)
        deltasq.append(deltasq[k - 1][mf])
        value.append(value[k - 1][mf])

    all_val = np.concatenate(value)
    all_dim = np.concatenate(
        [np.full(v.shape[0], k, dtype=np.int64) for k, v in enumerate(verts)]
    )
    all_rank = np.concatenate(
        [np.arange(v.shape[0], dtype=np.int64) for v in verts]
    )
    order = np.lexsort((all_rank, all_dim, all_val))
    granks_flat = np.empty(order.shape[0], dtype=np.int64)
    granks_flat[order] = np.arange(order.shape[0])
    offset = 0
    for v in verts:
        grank.append(granks_flat[offset : offset + v.shape[0]])
        offset += v.shape[0]
    return FilteredComplex(cloud, verts, value, deltasq, facets, grank, delaunay)


def build_delaunay_rips(
    cloud: PointCloud,
    backend: str = "auto",
    perturb: bool = False,
    delaunay: DelaunayComplex | None = None,
) -> FilteredComplex:
    """The Delaunay-Rips filtration: DEL(X) filtered by simplex diameter."""
    if delaunay is None:
        delaunay = delaunay_complex(cloud, backend=backend, perturb=perturb)
    by_dim = {k: delaunay.simplices(k) for k in range(delaunay.dim + 1)}
    return build_filtered(cloud, by_dim, delaunay)


def build_rips(cloud: PointCloud, max_dim: int, budget: int = RIPS_BUDGET) -> FilteredComplex:
    """Full Rips skeleton up to max_dim, filtered by simplex diameter."""
    n = cloud.n
    if max_dim < 0:
        raise InputError("max_dim must be >= 0")
    max_dim = min(max_dim, n - 1)
    total = sum(math.comb(n, k + 1) for k in range(max_dim + 1))
    if total > budget:
        raise ResourceError(
            f"Rips skeleton would have {total} simplices (budget {budget})"
        )
    by_dim = {}
    for k in range(max_dim + 1):
        by_dim[k] = np.array(
            list(combinations(range(n), k + 1)), dtype=np.int64
        ).reshape(math.comb(n, k + 1), k + 1)
    return build_filtered(cloud, by_dim)
