"""Delaunay-Rips persistence via Urquhart cells.

Dimension d-1 comes from PH0 of the dual graph of the d-cells (negated
values, edges processed by decreasing diameter); dimensions d-2..2 from a
column reduction over (k+1)-cell boundaries within MSA_(k+1); dimensions 1
and 0 from the polygon reduction and Kruskal on the Urquhart graph.  Every
non-separator simplex contributes one apparent zero-persistence pair at the
moment its cofacets merge, which is what makes the output match the
boundary-matrix oracle pair for pair, zero-persistence pairs included.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .complexes import FilteredComplex, build_delaunay_rips
from .diagram import PersistenceDiagram, PersistencePair
from .errors import ContractError, InternalError, UnsupportedError
from .geometry import PointCloud
from .spanning import (
    OUTER_RANK,
    SimplexSet,
    UnionFind,
    build_cells,
    kruskal_mst,
    non_manifold_simplices,
    urquhart_simplices,
)

logger = logging.getLogger("delrips")


@dataclass
class StageResult:
    """Artifacts of one homology dimension of the pipeline."""

    pairs: list
    us: SimplexSet | None = None
    nm: SimplexSet | None = None
    msa: SimplexSet | None = None
    cells: list = field(default_factory=list)
    n_cells: int = 0
    n_reduction_zero_pairs: int = 0
    n_nonurquhart_pairs: int = 0
    unpaired_nonurquhart: list = field(default_factory=list)
    generator_chains: dict = field(default_factory=dict)


@dataclass
class PipelineResult:
    cloud: PointCloud
    complex: FilteredComplex
    diagram: PersistenceDiagram
    stages: dict           # homology dim -> StageResult
    mst: SimplexSet | None = None
    ug: SimplexSet | None = None

    def msa(self, k: int) -> SimplexSet | None:
        stage = self.stages.get(k)
        return stage.msa if stage else None


def _apparent_pairs(complex, k, merges):
    """Zero pairs for non-separator k-simplices merged during cell building."""
    if not merges:
        return []
    sig = np.fromiter((m[0] for m in merges), dtype=np.int64, count=len(merges))
    tau = np.fromiter((m[1] for m in merges), dtype=np.int64, count=len(merges))
    births = complex.value[k][sig].tolist()
    deaths = complex.value[k + 1][tau].tolist()
    bverts = complex.verts[k][sig].tolist()
    dverts = complex.verts[k + 1][tau].tolist()
    return [
        PersistencePair(k, b, d, tuple(bv), tuple(dv))
        for b, d, bv, dv in zip(births, deaths, bverts, dverts)
    ]


def codim1_persistence(
    complex: FilteredComplex,
    pool=None,
    retain_chains: bool = False,
) -> StageResult:
    """PH_(d-1) by PH0 of the dual graph of the Urquhart d-cells.

    Dual nodes are the cells with value -(cell value) (the synthetic outer
    cell, value +inf, is eldest); dual edges are the Urquhart (d-1)-
    simplices, processed by decreasing order.  A merge of two live
    components kills the younger one; separators whose endpoints are
    already connected form MSA_(d-1).
    """
    d = complex.top_dim
    k = d - 1
    us = urquhart_simplices(k, complex)
    context = np.arange(complex.size(d), dtype=np.int64)
    cells, merges = build_cells(k, complex, context, us, with_outer=True, pool=pool)
    pairs = _apparent_pairs(complex, k, merges)

    cell_of = {}
    outer_cell_idx = None
    for i, cell in enumerate(cells):
        for m in cell.members:
            cell_of[m] = i
        if cell.max_rank == OUTER_RANK:
            outer_cell_idx = i
    if outer_cell_idx is None:
        raise InternalError("codimension-1 construction lost the outer cell")

    uf = UnionFind(len(cells))
    comp_max = [cell.max_rank for cell in cells]          # OUTER_RANK = +inf
    comp_max_cell = list(range(len(cells)))
    comp_chain = [set(cell.boundary) for cell in cells] if retain_chains else None

    counts, indptr, owners = complex.cofacet_table(k, context)
    sep_desc = us.ids[::-1].tolist()  # decreasing rank = decreasing order
    msa_mask = np.zeros(complex.size(k), dtype=bool)
    chains = {}

    values_k = complex.value[k]
    values_d = complex.value[d]

    def later(a, b):
        if a == OUTER_RANK:
            return b != OUTER_RANK
        if b == OUTER_RANK:
            return False
        return a > b

    for sigma in sep_desc:
        lo, hi = indptr[sigma], indptr[sigma + 1]
        cof = owners[lo:hi]
        if len(cof) == 2:
            ca, cb = cell_of[int(cof[0])], cell_of[int(cof[1])]
        elif len(cof) == 1:
            ca, cb = cell_of[int(cof[0])], outer_cell_idx
        else:
            raise InternalError(
                f"separator {complex.simplex(k, sigma)} has {len(cof)} cofacets"
            )
        ra, rb = uf.find(ca), uf.find(cb)
        if ra == rb:
            msa_mask[sigma] = True
            continue
        # elder rule on the reversed filtration: the component whose largest
        # cell appears later survives; the outer component never dies
        if later(comp_max[ra], comp_max[rb]):
            elder, young = ra, rb
        else:
            elder, young = rb, ra
        death_rank = comp_max[young]
        if death_rank == OUTER_RANK:
            raise InternalError("outer dual component cannot die")
        death_cell = cells[comp_max_cell[young]]
        pair = PersistencePair(
            k,
            float(values_k[sigma]),
            float(values_d[death_rank]),
            birth_simplex=complex.simplex(k, sigma),
            death_simplex=complex.simplex(d, death_rank),
            death_cell=death_cell,
        )
        pairs.append(pair)
        if retain_chains:
            chains[(pair.dim, pair.birth_simplex)] = frozenset(comp_chain[young])
        root, _ = uf.union(ra, rb)
        comp_max[root] = comp_max[elder]
        comp_max_cell[root] = comp_max_cell[elder]
        if retain_chains:
            a, b = comp_chain[ra], comp_chain[rb]
            if len(a) < len(b):
                a, b = b, a
            a.symmetric_difference_update(b)
            comp_chain[root] = a

    if uf.count != 1:
        raise InternalError("dual graph disconnected at the end of codimension-1")

    stage = StageResult(
        pairs=pairs,
        us=us,
        msa=SimplexSet(k, msa_mask, complex),
        cells=cells,
        n_cells=sum(1 for c in cells if c.members),
        generator_chains=chains,
    )
    return stage


def _reduce_cell_columns(
    complex,
    k,
    cells,
    excluded_mask=None,
    pool=None,
    retain_full: bool = False,
):
    """Left-to-right reduction of cell boundary columns over separator rows.

    Cells are ordered by the rank of their largest member (which refines
    value order); the pivot of a column is its largest separator.  Returns
    (pair list as (pivot_rank, cell_index), columns, full_chains) in the
    cells' sorted order.  The synthetic outer cell never enters the
    reduction: its members were consumed by apparent pairs.  The optional
    pool runs the lock-guarded temporary-pair protocol: a later claimant of
    a pivot yields to an earlier one and restarts, which leaves the final
    pairing identical to the sequential reduction.
    """
    order = sorted(
        (i for i in range(len(cells)) if not cells[i].is_outer),
        key=lambda i: cells[i].max_rank,
    )
    cells_sorted = [cells[i] for i in order]
    ncells = len(cells_sorted)
    columns = []
    full_chains = [] if retain_full else None
    for cell in cells_sorted:
        col = set(cell.boundary)
        if excluded_mask is not None:
            col = {r for r in col if not excluded_mask[r]}
        columns.append(col)
        if retain_full:
            full_chains.append(set(cell.boundary))
    budget = ncells + 2

    if pool is None:
        pivot_of = {}
        pair_pivot = [None] * ncells
        for j in range(ncells):
            col = columns[j]
            additions = 0
            while col:
                p = max(col)
                owner = pivot_of.get(p)
                if owner is None:
                    pivot_of[p] = j
                    pair_pivot[j] = p
                    break
                col.symmetric_difference_update(columns[owner])
                if retain_full:
                    full_chains[j].symmetric_difference_update(full_chains[owner])
                additions += 1
                if additions > budget:
                    raise InternalError("cell reduction exceeded its column budget")
            if not col:
                raise InternalError(
                    f"cell column vanished during the dimension-{k} reduction"
                )
        return [(pair_pivot[j], order[j]) for j in range(ncells)], columns, full_chains

    # temporary-pair protocol (lock-guarded compare-and-update)
    lock = threading.Lock()
    pivot_of = {}
    pair_pivot = [None] * ncells
    pending = deque(range(ncells))

    def worker():
        while True:
            with lock:
                if not pending:
                    return
                j = pending.popleft()
            col = columns[j]
            additions = 0
            while True:
                if not col:
                    raise InternalError(
                        f"cell column vanished during the dimension-{k} reduction"
                    )
                p = max(col)
                with lock:
                    owner = pivot_of.get(p)
                    if owner is None:
                        pivot_of[p] = j
                        pair_pivot[j] = p
                        break
                    if owner > j:
                        # steal the temporary pair; the former claimant restarts
                        pivot_of[p] = j
                        pair_pivot[j] = p
                        pair_pivot[owner] = None
                        pending.append(owner)
                        break
                    other = set(columns[owner])
                col.symmetric_difference_update(other)
                additions += 1
                if additions > budget:
                    raise InternalError("cell reduction exceeded its column budget")

    n_workers = getattr(pool, "_max_workers", 2)
    futures = [pool.submit(worker) for _ in range(n_workers)]
    for f in futures:
        f.result()
    return [(pair_pivot[j], order[j]) for j in range(ncells)], columns, None


def intermediate_persistence(
    k: int,
    complex: FilteredComplex,
    msa_above: SimplexSet,
    pool=None,
) -> StageResult:
    """PH_k from MSA_(k+1) by pairing (k+1)-cells with separator simplices."""
    d = complex.top_dim
    if not 2 <= k <= d - 2:
        raise ContractError(f"intermediate stage needs 2 <= k <= {d - 2}")
    us = urquhart_simplices(k, complex, context=msa_above.ids)
    nm = non_manifold_simplices(k, msa_above, complex)
    separators = SimplexSet(k, us.mask | nm.mask, complex)
    cells, merges = build_cells(
        k, complex, msa_above.ids, separators, with_outer=False, pool=pool
    )
    pairs = _apparent_pairs(complex, k, merges)
    reduced, _, _ = _reduce_cell_columns(complex, k, cells, pool=pool)

    values_k = complex.value[k]
    paired = np.zeros(complex.size(k), dtype=bool)
    n_zero = 0
    n_nm_pivots = 0
    for pivot, cell_idx in reduced:
        cell = cells[cell_idx]
        birth = float(values_k[pivot])
        pair = PersistencePair(
            k,
            birth,
            cell.value,
            birth_simplex=complex.simplex(k, pivot),
            death_simplex=complex.simplex(k + 1, cell.max_rank),
            death_cell=cell,
        )
        pairs.append(pair)
        paired[pivot] = True
        if pair.death == pair.birth:
            n_zero += 1
        if nm.mask[pivot] and not us.mask[pivot]:
            n_nm_pivots += 1

    msa_mask = us.mask & ~paired
    unpaired_nm = np.nonzero(nm.mask & ~us.mask & ~paired)[0]
    stage = StageResult(
        pairs=pairs,
        us=us,
        nm=nm,
        msa=SimplexSet(k, msa_mask, complex),
        cells=cells,
        n_cells=sum(1 for c in cells if c.members),
        n_reduction_zero_pairs=n_zero,
        n_nonurquhart_pairs=n_nm_pivots,
        unpaired_nonurquhart=[complex.simplex(k, int(i)) for i in unpaired_nm],
    )
    if stage.unpaired_nonurquhart:
        logger.warning(
            "dimension %d: %d non-manifold non-Urquhart simplices stayed "
            "unpaired: %s", k, len(stage.unpaired_nonurquhart),
            stage.unpaired_nonurquhart[:5],
        )
    return stage


def ph01(
    complex: FilteredComplex,
    msa2: SimplexSet,
    pool=None,
    retain_chains: bool = False,
):
    """PH0 and PH1 from MSA_2: Kruskal on the Urquhart graph, then polygons.

    Polygon boundary columns keep only Urquhart/non-manifold edges outside
    the MST, since MST edges kill PH0 classes and cannot give birth to PH1.
    Returns (stage0, stage1, mst, ug).
    """
    ug = urquhart_simplices(1, complex, context=msa2.ids)
    nm1 = non_manifold_simplices(1, msa2, complex)
    separators = SimplexSet(1, ug.mask | nm1.mask, complex)
    cells, merges = build_cells(
        1, complex, msa2.ids, separators, with_outer=False, pool=pool
    )
    pairs1 = _apparent_pairs(complex, 1, merges)

    mst, pairs0 = kruskal_mst(ug, complex)

    reduced, _, full_chains = _reduce_cell_columns(
        complex, 1, cells, excluded_mask=mst.mask,
        pool=None if retain_chains else pool, retain_full=retain_chains,
    )
    values_1 = complex.value[1]
    paired = np.zeros(complex.size(1), dtype=bool)
    chains = {}
    n_zero = 0
    n_nm_pivots = 0
    for pos, (pivot, cell_idx) in enumerate(reduced):
        cell = cells[cell_idx]
        pair = PersistencePair(
            1,
            float(values_1[pivot]),
            cell.value,
            birth_simplex=complex.simplex(1, pivot),
            death_simplex=complex.simplex(2, cell.max_rank),
            death_cell=cell,
        )
        pairs1.append(pair)
        paired[pivot] = True
        if pair.death == pair.birth:
            n_zero += 1
        if nm1.mask[pivot] and not ug.mask[pivot]:
            n_nm_pivots += 1
        if retain_chains:
            chains[(1, pair.birth_simplex)] = frozenset(full_chains[pos])

    unpaired_ug = ug.mask & ~paired
    if not np.array_equal(unpaired_ug, mst.mask):
        raise InternalError(
            "unpaired Urquhart edges after the polygon reduction differ from "
            "the minimum spanning tree"
        )
    unpaired_nm = np.nonzero(nm1.mask & ~ug.mask & ~paired)[0]
    stage1 = StageResult(
        pairs=pairs1,
        us=ug,
        nm=nm1,
        msa=mst,
        cells=cells,
        n_cells=sum(1 for c in cells if c.members),
        n_reduction_zero_pairs=n_zero,
        n_nonurquhart_pairs=n_nm_pivots,
        unpaired_nonurquhart=[complex.simplex(1, int(i)) for i in unpaired_nm],
        generator_chains=chains,
    )
    if stage1.unpaired_nonurquhart:
        logger.warning(
            "dimension 1: %d non-manifold non-Urquhart edges stayed unpaired",
            len(stage1.unpaired_nonurquhart),
        )
    stage0 = StageResult(pairs=pairs0, msa=mst)
    return stage0, stage1, mst, ug


def compute_diagrams(
    cloud: PointCloud,
    keep_zero: bool = False,
    threads: int = 1,
    backend: str = "auto",
    perturb: bool = False,
    retain_generators: bool = False,
    complex: FilteredComplex | None = None,
) -> PipelineResult:
    """Full Delaunay-Rips persistence of a point cloud (dimensions 0..d-1).

    d = 2: the dual construction gives PH1 and MSA_1, Kruskal on the
    Urquhart graph gives PH0.  d = 3: dual PH2, then the polygon stage.
    d >= 4: dual PH_(d-1), intermediate stages for d-2..2, then polygons.
    d = 1 degenerates to PH0 by Kruskal on the line's neighbor edges.

    Parallel mode (threads > 1) must produce identical diagrams; generator
    retention forces the reductions sequential.
    """
    if complex is None:
        complex = build_delaunay_rips(cloud, backend=backend, perturb=perturb)
    d = complex.top_dim
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        stages = {}
        mst = ug = None
        if d == 0:
            raise UnsupportedError("single-point clouds have no filtration")
        if d == 1:
            edge_ids = np.arange(complex.size(1), dtype=np.int64)
            mst_set, pairs0 = kruskal_mst(edge_ids, complex)
            stages[0] = StageResult(pairs=pairs0, msa=mst_set)
            mst = mst_set
        else:
            top_stage = codim1_persistence(
                complex, pool=pool, retain_chains=retain_generators
            )
            stages[d - 1] = top_stage
            if d == 2:
                mst, pairs0 = kruskal_mst(top_stage.us, complex)
                if not np.array_equal(mst.mask, top_stage.msa.mask):
                    raise InternalError(
                        "Kruskal MST differs from the dual-construction MSA_1"
                    )
                stages[0] = StageResult(pairs=pairs0, msa=mst)
                ug = top_stage.us
            else:
                msa = top_stage.msa
                for k in range(d - 2, 1, -1):
                    stage = intermediate_persistence(k, complex, msa, pool=pool)
                    stages[k] = stage
                    msa = stage.msa
                stage0, stage1, mst, ug = ph01(
                    complex, msa, pool=pool, retain_chains=retain_generators
                )
                stages[0] = stage0
                stages[1] = stage1

        all_pairs = [p for stage in stages.values() for p in stage.pairs]
        # canonical order: thread scheduling must not leak into the output
        all_pairs.sort(key=lambda p: (p.dim, p.birth, p.death, p.birth_simplex or ()))
        n_finite = sum(1 for p in all_pairs if not p.essential)
        n_essential = sum(1 for p in all_pairs if p.essential)
        if 2 * n_finite + n_essential != complex.total:
            raise InternalError(
                f"pair bookkeeping broken: {n_finite} pairs and {n_essential} "
                f"essential classes for {complex.total} simplices"
            )
        essentials = [p for p in all_pairs if p.essential]
        if len(essentials) != 1 or essentials[0].dim != 0:
            raise InternalError(
                "expected exactly one essential class, in dimension 0"
            )
        diagram = PersistenceDiagram(all_pairs, zero_retained=True)
        if not keep_zero:
            diagram = diagram.drop_zero()
        return PipelineResult(cloud, complex, diagram, stages, mst, ug)
    finally:
        if pool is not None:
            pool.shutdown()


@dataclass
class Generator:
    """A representative cycle of a positive persistence pair (d = 3)."""

    dim: int
    pair: PersistencePair
    simplices: list  # vertex tuples: edges for PH1, triangles for PH2


def extract_generators(
    cloud: PointCloud,
    min_persistence: float = 0.0,
    backend: str = "auto",
    perturb: bool = False,
    result: PipelineResult | None = None,
) -> list:
    """Representative cycles of PH1/PH2 pairs with enough persistence.

    PH1 chains are polygon columns after the reduction (Urquhart and
    non-manifold edges, MST edges included so the chain closes); PH2 chains
    are the boundary surfaces of the dual components that die (Urquhart
    triangles).  Only d = 3 is supported.
    """
    if cloud.dim != 3:
        raise UnsupportedError("generator extraction is implemented for d = 3 only")
    if result is None:
        result = compute_diagrams(
            cloud, keep_zero=False, backend=backend, perturb=perturb,
            retain_generators=True,
        )
    complex = result.complex
    out = []
    for dim in (1, 2):
        stage = result.stages.get(dim)
        if stage is None:
            continue
        for pair in stage.pairs:
            if pair.essential or pair.persistence < min_persistence:
                continue
            if pair.persistence <= 0.0:
                continue
            chain = stage.generator_chains.get((dim, pair.birth_simplex))
            if chain is None:
                continue
            simplices = [complex.simplex(dim, int(r)) for r in sorted(chain)]
            out.append(Generator(dim, pair, simplices))
    out.sort(key=lambda g: -g.pair.persistence)
    return out
