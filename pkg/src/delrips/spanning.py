"""Urquhart simplices, non-manifold simplices, cells, and spanning acycles.

The combinatorial layer of the pipeline: a k-simplex is an Urquhart simplex
when it is not the maximal facet of any cofacet in its context (the full
complex in codimension 1, the spanning acycle one dimension up otherwise).
Cells are union-find classes of (k+1)-simplices obtained by merging across
every non-separator k-simplex; each merge corresponds to an apparent
zero-persistence pair.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import oracle
from .complexes import FilteredComplex
from .diagram import PersistencePair
from .errors import ContractError, InputError, InternalError


class UnionFind:
    """Array union-find with path compression and union by rank.

    With concurrent=True, unions go through a compare-and-update critical
    section and are safe under simultaneous callers; results are identical
    to sequential use because the merge relation is order-independent.
    """

    def __init__(self, n: int, concurrent: bool = False):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n
        self._lock = threading.Lock() if concurrent else None

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> tuple:
        """Union the classes of a and b; returns (survivor, absorbed).

        absorbed is None when a and b were already in the same class.
        """
        if self._lock is None:
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                return ra, None
            if self.rank[ra] < self.rank[rb]:
                ra, rb = rb, ra
            self.parent[rb] = ra
            if self.rank[ra] == self.rank[rb]:
                self.rank[ra] += 1
            self.count -= 1
            return ra, rb
        while True:
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                return ra, None
            with self._lock:
                # compare-and-update: both must still be roots
                if self.parent[ra] == ra and self.parent[rb] == rb:
                    if self.rank[ra] < self.rank[rb]:
                        ra, rb = rb, ra
                    self.parent[rb] = ra
                    if self.rank[ra] == self.rank[rb]:
                        self.rank[ra] += 1
                    self.count -= 1
                    return ra, rb


@dataclass
class SimplexSet:
    """Membership mask over the k-simplices of a filtered complex."""

    dim: int
    mask: np.ndarray
    complex: FilteredComplex

    @property
    def ids(self) -> np.ndarray:
        return np.nonzero(self.mask)[0]

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def __contains__(self, simplex) -> bool:
        k, rank = self.complex.index_of(simplex)
        return k == self.dim and bool(self.mask[rank])

    def vertices(self):
        return [tuple(map(int, row)) for row in self.complex.verts[self.dim][self.mask]]

    def values(self) -> np.ndarray:
        return self.complex.value[self.dim][self.mask]


def urquhart_simplices(k: int, complex: FilteredComplex, context=None) -> SimplexSet:
    """Urquhart k-simplices: never the maximal facet of a context cofacet.

    context None uses every cofacet in the complex (the codimension-1
    case); otherwise it is an array of (k+1)-ranks, normally a spanning
    acycle, which suffices by the maximal-facet lemma.
    """
    d = complex.top_dim
    if not 1 <= k < d:
        raise InputError(f"Urquhart simplices need 1 <= k < {d}, got {k}")
    maxfac = complex.max_facet_of(k + 1)
    if context is not None:
        maxfac = maxfac[np.asarray(context, dtype=np.int64)]
    mask = np.ones(complex.size(k), dtype=bool)
    mask[maxfac] = False
    return SimplexSet(k, mask, complex)


def non_manifold_simplices(k: int, msa_above, complex: FilteredComplex) -> SimplexSet:
    """k-simplices with more than two cofacets inside MSA_(k+1)."""
    ctx = msa_above.ids if isinstance(msa_above, SimplexSet) else np.asarray(msa_above)
    fac = complex.facets[k + 1][ctx]
    counts = np.bincount(fac.ravel(), minlength=complex.size(k))
    return SimplexSet(k, counts > 2, complex)


@dataclass
class UrquhartCell:
    """A union-find class of (k+1)-simplices delimited by separators.

    value/max_rank describe the largest member; boundary is the Z/2 chain
    of separator k-simplices left uncancelled by the member boundaries.
    OUTER identifies the synthetic unbounded cell of the codimension-1
    construction (value +inf, no members of its own).
    """

    dim: int                      # k+1, the dimension of the members
    members: list
    boundary: set
    max_rank: int                 # rank of the largest member, -1 for outer
    value: float
    is_outer: bool = False

    @property
    def max_simplex_rank(self):
        return self.max_rank


OUTER_RANK = -1


def build_cells(
    k: int,
    complex: FilteredComplex,
    context,
    separators: SimplexSet,
    with_outer: bool = False,
    pool=None,
):
    """Union-find cells of (k+1)-simplices merged across non-separators.

    Returns (cells, merges) where merges records one apparent pair
    (sigma_rank, tau_rank) per non-separator k-simplex sigma, tau being its
    earliest cofacet with maximal facet sigma.  A non-separator with a
    single context cofacet (a hull facet in codimension 1, a margin simplex
    of the spanning acycle otherwise) merges its cell into one synthetic
    outer cell of value +inf; with_outer additionally seeds that cell's
    boundary with the hull separators so it can serve as a dual node.

    Every non-separator must have at most two context cofacets; violations
    raise InternalError, since they mean the separator set was wrong.
    """
    ctx = np.asarray(context, dtype=np.int64)
    m = ctx.shape[0]
    local = {int(r): i for i, r in enumerate(ctx)}
    counts, indptr, owners = complex.cofacet_table(k, ctx)
    maxfac = complex.max_facet_of(k + 1)
    sep_mask = separators.mask

    outer_id = m
    uf = UnionFind(m + 1)
    members = [[r] for r in ctx.tolist()]
    max_rank = ctx.tolist()
    fac_table = complex.facets[k + 1]
    sep_list = sep_mask.tolist()
    boundary = [
        {f for f in row if sep_list[f]} for row in fac_table[ctx].tolist()
    ]
    boundary.append(None)
    if with_outer:
        hull = np.nonzero((counts == 1) & sep_mask)[0]
        boundary[outer_id] = set(hull.tolist())
    else:
        boundary[outer_id] = set()
    members.append([])
    max_rank.append(OUTER_RANK)

    if np.any(~sep_mask & (counts == 0)):
        missing = int(np.nonzero(~sep_mask & (counts == 0))[0][0])
        raise InternalError(
            f"non-separator {complex.simplex(k, missing)} has no context "
            "cofacet; the context is not spanning"
        )

    merges = []
    merge_lock = threading.Lock() if pool is not None else None

    def merge_components(ia, ib, sigma, tau):
        # roots are resolved inside the critical section in parallel mode
        sa, sb = uf.find(ia), uf.find(ib)
        if sa == sb:
            raise InternalError(
                "redundant merge across non-separator simplex "
                f"{complex.simplex(k, sigma)}; separator set is inconsistent"
            )
        surv, dead = uf.union(sa, sb)
        if dead is None:
            raise InternalError("union-find merge lost a class")
        if len(boundary[surv]) < len(boundary[dead]):
            boundary[surv], boundary[dead] = boundary[dead], boundary[surv]
        boundary[surv].symmetric_difference_update(boundary[dead])
        boundary[dead] = None
        if len(members[surv]) < len(members[dead]):
            members[surv], members[dead] = members[dead], members[surv]
        members[surv].extend(members[dead])
        members[dead] = ()
        if _rank_after(max_rank[dead], max_rank[surv]):
            max_rank[surv] = max_rank[dead]
        merges.append((sigma, tau))

    nonsep = np.nonzero(~sep_mask & (counts > 0))[0]

    def handle(sigma):
        lo, hi = indptr[sigma], indptr[sigma + 1]
        cof = owners[lo:hi]
        if len(cof) > 2:
            raise InternalError(
                f"non-separator {complex.simplex(k, sigma)} has {len(cof)} "
                "context cofacets; non-manifold set was wrong"
            )
        partners = [int(t) for t in cof if maxfac[t] == sigma]
        if not partners:
            raise InternalError(
                f"non-separator {complex.simplex(k, sigma)} is not the maximal "
                "facet of any context cofacet"
            )
        tau = min(partners)
        if len(cof) == 2:
            args = (local[int(cof[0])], local[int(cof[1])], int(sigma), tau)
        else:
            args = (local[int(cof[0])], outer_id, int(sigma), tau)
        if merge_lock is None:
            merge_components(*args)
        else:
            with merge_lock:
                merge_components(*args)

    if pool is not None:
        # cofacet/partner lookups run concurrently; merges themselves
        # commute (symmetric differences and max tracking are
        # order-independent), so the resulting cells are identical
        list(pool.map(handle, [int(s) for s in nonsep]))
    else:
        for sigma in nonsep:
            handle(int(sigma))

    outer_root = uf.find(outer_id)
    cells = {}
    for i in range(m + 1):
        root = uf.find(i)
        if root not in cells:
            is_outer = root == outer_root
            value = float("inf") if is_outer else float(
                complex.value[k + 1][max_rank[root]]
            )
            cells[root] = UrquhartCell(
                dim=k + 1,
                members=list(members[root]),
                boundary=boundary[root],
                max_rank=max_rank[root],
                value=value,
                is_outer=is_outer,
            )
    if not with_outer and not cells[outer_root].members:
        del cells[outer_root]
    return list(cells.values()), merges


def _rank_after(a: int, b: int) -> bool:
    """True when rank a comes after rank b, OUTER_RANK being latest."""
    if a == OUTER_RANK:
        return b != OUTER_RANK
    if b == OUTER_RANK:
        return False
    return a > b


def kruskal_mst(edges, complex: FilteredComplex):
    """Kruskal on an edge set, producing the MST and the PH0 pairs.

    Edges are processed in the total order; at a merge the class holding
    the smaller minimum vertex index survives (elder rule; births all being
    0, values are unaffected).  Returns (mst: SimplexSet, pairs) with the
    essential (0, inf) class included in pairs.
    """
    ids = edges.ids if isinstance(edges, SimplexSet) else np.asarray(edges, dtype=np.int64)
    n = complex.cloud.n
    uf = UnionFind(n)
    min_vertex = list(range(n))
    mst_mask = np.zeros(complex.size(1), dtype=bool)
    pairs = []
    everts = complex.verts[1]
    values = complex.value[1]
    for e in sorted(int(x) for x in ids):
        u, v = int(everts[e, 0]), int(everts[e, 1])
        ru, rv = uf.find(u), uf.find(v)
        if ru == rv:
            continue
        surv, dead = (ru, rv) if min_vertex[ru] <= min_vertex[rv] else (rv, ru)
        root, absorbed = uf.union(ru, rv)
        min_vertex[root] = min_vertex[surv]
        pairs.append(
            PersistencePair(
                0, 0.0, float(values[e]),
                birth_simplex=(min_vertex[dead],),
                death_simplex=tuple(int(x) for x in everts[e]),
            )
        )
        mst_mask[e] = True
    if uf.count != 1:
        raise InternalError("edge set does not span the vertices")
    root = uf.find(0)
    pairs.append(PersistencePair(0, 0.0, float("inf"), birth_simplex=(min_vertex[root],)))
    return SimplexSet(1, mst_mask, complex), pairs


def _skeleton_simplices(complex: FilteredComplex, up_to: int):
    out = []
    for k in range(min(up_to, complex.top_dim) + 1):
        out.extend(tuple(map(int, row)) for row in complex.verts[k])
    return out


def verify_spanning_acycle(k: int, simplex_set, complex: FilteredComplex) -> bool:
    """True iff the set is k-spanning and k-acyclic (rank computation).

    Spanning-ness is a reduced-homology condition: for k = 1 it means one
    connected component, i.e. unreduced Betti 0 equal to 1.
    """
    if isinstance(simplex_set, SimplexSet):
        if simplex_set.dim != k:
            raise ContractError("simplex set dimension mismatch")
        extra = simplex_set.vertices()
    else:
        extra = [tuple(sorted(int(v) for v in s)) for s in simplex_set]
    sims = _skeleton_simplices(complex, k - 1) + list(extra)
    betti = oracle.betti_numbers(sims)
    b_k = betti[k] if len(betti) > k else 0
    b_km1 = betti[k - 1] - (1 if k == 1 else 0)
    return b_k == 0 and b_km1 == 0


def reverse_delete_msa(k: int, candidates, complex: FilteredComplex) -> SimplexSet:
    """Reverse-delete on a spanning set: the test-oracle route to MSA_k.

    Deletes candidates in decreasing order whenever spanning-ness survives;
    quadratic in rank computations, so for small instances only.
    """
    ids = candidates.ids if isinstance(candidates, SimplexSet) else np.asarray(candidates)
    keep = set(int(x) for x in ids)
    skeleton = _skeleton_simplices(complex, k - 1)
    verts_k = complex.verts[k]

    def spanning(s):
        sims = skeleton + [tuple(map(int, verts_k[i])) for i in s]
        betti = oracle.betti_numbers(sims)
        return betti[k - 1] == (1 if k == 1 else 0)

    if not spanning(keep):
        raise ContractError("candidate set is not spanning")
    for e in sorted(keep, reverse=True):
        trial = keep - {e}
        if spanning(trial):
            keep = trial
    mask = np.zeros(complex.size(k), dtype=bool)
    mask[list(keep)] = True
    return SimplexSet(k, mask, complex)
