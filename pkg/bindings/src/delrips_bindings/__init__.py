"""Thin scripting layer over the delrips command line.

Everything goes through the CLI and its documented formats (point-cloud
text in, diagram JSON / generator records out), so results are identical
to direct CLI invocations by construction.  Inputs are plain nested
sequences; outputs are copied into plain Python containers.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["BoundDiagram", "CoreError", "bottleneck", "compute", "generators"]


class CoreError(RuntimeError):
    """A delrips invocation failed; carries the core's message and code."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _run(*args: str, stdin: str | None = None) -> str:
    proc = subprocess.run(
        [sys.executable, "-m", "delrips.cli", *args],
        capture_output=True,
        text=True,
        input=stdin,
    )
    if proc.returncode != 0:
        message = proc.stderr.strip() or f"delrips exited with {proc.returncode}"
        raise CoreError(message, proc.returncode)
    return proc.stdout


def _points_to_text(points) -> str:
    rows = []
    width = None
    for row in points:
        coords = [float(c) for c in row]
        if width is None:
            width = len(coords)
        elif len(coords) != width:
            raise ValueError("ragged point input: rows have unequal lengths")
        rows.append(" ".join(repr(c) for c in coords))
    if not rows or width == 0:
        raise ValueError("empty point input")
    return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class BoundDiagram:
    """Copy of a persistence diagram: per-dimension (birth, death) pairs,
    essential classes as (dimension, birth), and the units tag."""

    dims: dict = field(default_factory=dict)
    essential: tuple = ()
    units: str = "diameter"

    @classmethod
    def from_json_text(cls, text: str) -> "BoundDiagram":
        obj = json.loads(text)
        dims = {
            int(k): tuple((float(b), float(d)) for b, d in pts)
            for k, pts in obj["dims"].items()
        }
        essential = tuple((int(k), float(b)) for k, b in obj.get("essential", ()))
        return cls(dims, essential, obj.get("units", "diameter"))

    def to_json_obj(self):
        return {
            "dims": {str(k): [list(p) for p in pts] for k, pts in self.dims.items()},
            "units": self.units,
            "essential": [list(e) for e in self.essential],
        }

    def pairs(self, dim: int, include_essential: bool = True):
        """(birth, death) pairs of one dimension; essentials get death=inf."""
        out = list(self.dims.get(dim, ()))
        if include_essential:
            out.extend((b, math.inf) for k, b in self.essential if k == dim)
        return out


def compute(points, units: str = "diameter", keep_zero: bool = False,
            perturb: bool = False) -> BoundDiagram:
    """Delaunay-Rips persistence of an n x d array-like of coordinates.

    Identical values to `delrips ph` on the same data; core errors are
    re-raised as CoreError with the core's message.
    """
    text = _points_to_text(points)
    args = ["ph", "--units", units]
    if keep_zero:
        args.append("--keep-zero")
    if perturb:
        args.append("--perturb")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "points.txt"
        path.write_text(text, encoding="utf-8")
        out = _run(*args, str(path))
    return BoundDiagram.from_json_text(out)


def _as_diagram(obj, dim: int) -> BoundDiagram:
    if isinstance(obj, BoundDiagram):
        return obj
    pts = tuple((float(b), float(d)) for b, d in obj)
    return BoundDiagram({dim: pts})


def bottleneck(a, b, log_scale: bool = False, dim: int | None = None) -> float:
    """Exact bottleneck distance via `delrips compare`.

    a and b are BoundDiagrams or bare (birth, death) sequences; dim selects
    the homology dimension (defaults to the single dimension present, else
    1).  Returns math.inf on an essential-count mismatch.
    """
    if dim is None:
        if isinstance(a, BoundDiagram):
            dims = sorted(a.dims)
            dim = dims[0] if len(dims) == 1 else 1
        else:
            dim = 1
    da, db = _as_diagram(a, dim), _as_diagram(b, dim)
    args = ["compare", "--dim", str(dim)]
    if log_scale:
        args.append("--log")
    with tempfile.TemporaryDirectory() as tmp:
        pa = Path(tmp) / "a.json"
        pb = Path(tmp) / "b.json"
        pa.write_text(json.dumps(da.to_json_obj()), encoding="utf-8")
        pb.write_text(json.dumps(db.to_json_obj()), encoding="utf-8")
        out = _run(*args, str(pa), str(pb)).strip()
    return math.inf if out == "inf" else float(out)


def generators(points, min_persistence: float = 0.0, perturb: bool = False):
    """Representative cycles for d = 3 clouds, via `delrips generators`.

    Returns a list of dicts with keys dim, birth, death, persistence and
    simplices (vertex tuples, 0-based).
    """
    text = _points_to_text(points)
    args = ["generators", "--min-persistence", repr(float(min_persistence))]
    if perturb:
        args.append("--perturb")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "points.txt"
        path.write_text(text, encoding="utf-8")
        out = _run(*args, str(path))
    result = []
    current = None
    for line in out.splitlines():
        if line.startswith("# generator "):
            meta = dict(
                part.split("=", 1) for part in line[len("# generator "):].split()
            )
            current = {
                "dim": int(meta["dim"]),
                "birth": float(meta["birth"]),
                "death": float(meta["death"]),
                "persistence": float(meta["persistence"]),
                "simplices": [],
            }
            result.append(current)
        elif line.startswith(("l ", "f ")) and current is not None:
            verts = tuple(int(v) - 1 for v in line.split()[1:])
            current["simplices"].append(verts)
    return result
