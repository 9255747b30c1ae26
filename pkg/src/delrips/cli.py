"""Command-line interface.

Subcommands: ph, compare, generators, stats, experiment, validate.
Diagrams go to stdout as JSON, logs to stderr.  Exit codes: 0 success,
1 usage, 2 input/parse, 3 degeneracy, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from . import oracle
from .complexes import build_rips
from .diagram import PersistenceDiagram
from .errors import DelripsError, InputError, UsageError
from .experiments import (
    InstanceSpec,
    bound_histogram,
    generate,
    rows_to_csv,
    stability_sweep,
    stats_table,
)
from .geometry import PointCloud, validate_general_position
from .metrics import DiagramPointSet, bottleneck, log_diagram
from .persistence import compute_diagrams, extract_generators

logger = logging.getLogger("delrips")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_cloud(path) -> PointCloud:
    try:
        return PointCloud.load(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _check_dim(cloud):
    # d = 1 degenerates to the Kruskal PH0 special case; 7+ is unsupported
    if not 1 <= cloud.dim <= 6:
        raise InputError(f"supported ambient dimensions are 1..6, got d={cloud.dim}")


def cmd_ph(args) -> int:
    cloud = _load_cloud(args.input)
    _check_dim(cloud)
    if args.filtration == "rips":
        max_dim = args.max_dim if args.max_dim is not None else cloud.dim
        complex = build_rips(cloud, max_dim)
        diagram = oracle.reduce(complex)
        if not args.keep_zero:
            diagram = diagram.drop_zero()
    else:
        result = compute_diagrams(
            cloud,
            keep_zero=True,
            threads=args.threads,
            perturb=args.perturb,
        )
        diagram = result.diagram
        if args.oracle:
            reference = oracle.reduce(result.complex)
            if sorted(diagram.multiset()) != sorted(reference.multiset()):
                print(
                    "oracle mismatch: pipeline and boundary-matrix reduction "
                    "disagree", file=sys.stderr,
                )
                return 4
            logger.info("oracle check passed (%d pairs)", len(reference.pairs))
        if not args.keep_zero:
            diagram = diagram.drop_zero()
    if args.units == "radius":
        diagram = diagram.scaled(0.5)
    print(diagram.to_json(units=args.units, max_dim=args.max_dim))
    return 0


def cmd_compare(args) -> int:
    with open(args.diagram_a, "r", encoding="utf-8") as fh:
        da = PersistenceDiagram.from_json(fh.read())
    with open(args.diagram_b, "r", encoding="utf-8") as fh:
        db = PersistenceDiagram.from_json(fh.read())
    if da.units != db.units:
        raise InputError(f"units differ: {da.units} vs {db.units}")
    a = DiagramPointSet.from_diagram(da, args.dim)
    b = DiagramPointSet.from_diagram(db, args.dim)
    if args.log:
        a, b = log_diagram(a), log_diagram(b)
    value = bottleneck(a, b)
    if math.isinf(value):
        print("inf")
    else:
        print(f"{value:.12g}")
    return 0


def cmd_generators(args) -> int:
    cloud = _load_cloud(args.input)
    gens = extract_generators(cloud, min_persistence=args.min_persistence,
                              perturb=args.perturb)
    lines = ["# delrips generators (OBJ-like: v/l/f records, 1-based indices)"]
    for v in cloud.points:
        lines.append("v " + " ".join(repr(float(c)) for c in v))
    for g in gens:
        p = g.pair
        lines.append(
            f"# generator dim={g.dim} birth={p.birth!r} death={p.death!r} "
            f"persistence={p.persistence!r}"
        )
        for simplex in g.simplices:
            rec = "l" if g.dim == 1 else "f"
            lines.append(rec + " " + " ".join(str(v + 1) for v in simplex))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        logger.info("wrote %d generators to %s", len(gens), args.output)
    else:
        print(text, end="")
    return 0


def cmd_stats(args) -> int:
    cloud = _load_cloud(args.input)
    _check_dim(cloud)
    result = compute_diagrams(cloud, keep_zero=True, threads=args.threads,
                              perturb=args.perturb)
    rows = stats_table(result)
    if args.json:
        print(json.dumps(rows))
        return 0
    cols = ["k", "ph_pairs", "cells", "msa", "us", "del",
            "cells_per_msa", "cells_per_del"]
    print("\t".join(cols))
    for row in rows:
        out = []
        for c in cols:
            v = row.get(c)
            if v is None:
                out.append("/")
            elif isinstance(v, float):
                out.append(f"{v:.2f}")
            else:
                out.append(str(v))
        print("\t".join(out))
        if "us_context_equals_full" in row:
            logger.info(
                "k=%d: Urquhart set from MSA context %s the full-star set",
                row["k"],
                "equals" if row["us_context_equals_full"] else "differs from",
            )
    return 0


def cmd_experiment(args) -> int:
    if args.mode == "generate":
        spec = InstanceSpec(kind=args.kind, n=args.n, dim=args.dim,
                            noise=args.sigma, eps=args.eps, seed=args.seed)
        cloud = generate(spec)
        text = cloud.to_text()
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            print(text, end="")
        return 0
    if args.mode == "bound-hist":
        rows, summary = bound_histogram(
            args.kind, trials=args.trials, n=args.n, k=args.dim_k,
            sigma=args.sigma, seed=args.seed,
        )
        _emit_rows(rows, summary, args)
        return 0
    if args.mode == "stability":
        eps_grid = [float(e) for e in args.eps_grid.split(",")]
        rows, summaries = stability_sweep(
            args.kind, trials=args.trials, n=args.n, eps_grid=eps_grid,
            k=args.dim_k, sigma=args.sigma, seed=args.seed,
        )
        _emit_rows(rows, summaries, args)
        return 0
    raise UsageError(f"unknown experiment mode {args.mode!r}")


def _emit_rows(rows, summary, args):
    csv_text = rows_to_csv(rows)
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        logger.info("wrote %d rows to %s", len(rows), args.out_csv)
    summary_text = json.dumps(summary)
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            fh.write(summary_text)
        logger.info("wrote summary to %s", args.out_json)
    if not args.out_csv and not args.out_json:
        print(summary_text)


def cmd_validate(args) -> int:
    cloud = _load_cloud(args.input)
    report = validate_general_position(cloud)
    print(report.summary())
    return 0 if report.clean else 3


def build_parser() -> _Parser:
    parser = _Parser(prog="delrips",
                     description="Delaunay-Rips persistence diagrams")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ph", help="compute a persistence diagram")
    p.add_argument("input", help="point-cloud text file")
    p.add_argument("--max-dim", type=int, default=None,
                   help="largest homology dimension to emit")
    p.add_argument("--units", choices=("diameter", "radius"),
                   default="diameter")
    p.add_argument("--keep-zero", action="store_true",
                   help="retain zero-persistence pairs")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check against the boundary-matrix reduction")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--perturb", action="store_true",
                   help="break exact cospherical ties by point index")
    p.add_argument("--filtration", choices=("delaunay-rips", "rips"),
                   default="delaunay-rips")
    p.set_defaults(func=cmd_ph)

    p = sub.add_parser("compare", help="bottleneck distance of two diagrams")
    p.add_argument("diagram_a")
    p.add_argument("diagram_b")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--log", action="store_true",
                   help="compare log-scaled diagrams")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generators", help="export representative cycles")
    p.add_argument("input")
    p.add_argument("--min-persistence", type=float, default=0.0)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--perturb", action="store_true")
    p.set_defaults(func=cmd_generators)

    p = sub.add_parser("stats", help="construction-size statistics")
    p.add_argument("input")
    p.add_argument("--json", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--perturb", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("experiment", help="experiment drivers")
    p.add_argument("mode", choices=("generate", "bound-hist", "stability"))
    p.add_argument("--kind", default="uniform-cube")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--dim", type=int, default=3,
                   help="ambient (uniform-cube) or sphere (antipodal) dimension")
    p.add_argument("--dim-k", type=int, default=1,
                   help="homology dimension for bound-hist/stability")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--eps-grid", default="0.001,0.002,0.005,0.01")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-json", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate", help="general-position report")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logger.setLevel(logging.INFO)
        return args.func(args)
    except DelripsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
