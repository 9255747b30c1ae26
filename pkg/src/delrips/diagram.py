"""Persistence pairs, diagrams, and their JSON serialization."""

from __future__ import annotations

import json
import math
from typing import NamedTuple

from .errors import InputError


class PersistencePair(NamedTuple):
    """One persistence class: birth/death in diameter units.

    death is +inf for essential classes.  birth_simplex (and, when known,
    death_simplex / death_cell) identify the creators; value invariants:
    birth <= death, birth == diameter(birth_simplex).
    """

    dim: int
    birth: float
    death: float
    birth_simplex: tuple | None = None
    death_simplex: tuple | None = None
    death_cell: object = None

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)

    @property
    def persistence(self) -> float:
        return self.death - self.birth


class PersistenceDiagram:
    """Per-dimension multisets of persistence pairs.

    Zero-persistence pairs are stored when `zero_retained`; accessors filter
    them unless asked otherwise.  Exactly one essential class is expected in
    dimension 0 and none above (asserted by the pipeline, not here).
    """

    def __init__(self, pairs=(), zero_retained: bool = True, units: str = "diameter"):
        self.pairs = list(pairs)
        self.zero_retained = zero_retained
        self.units = units

    def add(self, pair: PersistencePair):
        self.pairs.append(pair)

    @property
    def dims(self):
        return sorted({p.dim for p in self.pairs})

    def finite_pairs(self, dim=None, keep_zero=False):
        out = []
        for p in self.pairs:
            if p.essential or (dim is not None and p.dim != dim):
                continue
            if not keep_zero and p.death == p.birth:
                continue
            out.append(p)
        return out

    def essential_pairs(self, dim=None):
        return [
            p
            for p in self.pairs
            if p.essential and (dim is None or p.dim == dim)
        ]

    def points(self, dim, keep_zero=False):
        return [(p.birth, p.death) for p in self.finite_pairs(dim, keep_zero)]

    def multiset(self, keep_zero=True):
        """Sorted (dim, birth, death) triples, essentials with death=inf."""
        out = []
        for p in self.pairs:
            if not keep_zero and not p.essential and p.death == p.birth:
                continue
            out.append((p.dim, p.birth, p.death))
        return sorted(out)

    def drop_zero(self) -> "PersistenceDiagram":
        kept = [p for p in self.pairs if p.essential or p.death > p.birth]
        return PersistenceDiagram(kept, zero_retained=False, units=self.units)

    def scaled(self, factor: float) -> "PersistenceDiagram":
        out = []
        for p in self.pairs:
            death = p.death if p.essential else p.death * factor
            out.append(
                PersistencePair(p.dim, p.birth * factor, death, p.birth_simplex,
                                p.death_simplex, p.death_cell)
            )
        return PersistenceDiagram(out, self.zero_retained, self.units)

    def to_json_obj(self, units=None, max_dim=None):
        units = units or self.units
        dims = {}
        top = max(self.dims, default=0)
        if max_dim is not None:
            top = min(top, max_dim)
        for k in range(top + 1):
            dims[str(k)] = [
                [p.birth, p.death]
                for p in self.finite_pairs(k, keep_zero=self.zero_retained)
            ]
        essential = [[p.dim, p.birth] for p in self.pairs if p.essential
                     if max_dim is None or p.dim <= max_dim]
        return {"dims": dims, "units": units, "essential": essential}

    def to_json(self, units=None, max_dim=None) -> str:
        return json.dumps(self.to_json_obj(units=units, max_dim=max_dim))

    @classmethod
    def from_json_obj(cls, obj) -> "PersistenceDiagram":
        if not isinstance(obj, dict) or "dims" not in obj:
            raise InputError("diagram JSON must be an object with a 'dims' key")
        units = obj.get("units", "diameter")
        pairs = []
        for key, pts in obj["dims"].items():
            try:
                k = int(key)
            except ValueError:
                raise InputError(f"bad dimension key {key!r}") from None
            for bd in pts:
                if len(bd) != 2:
                    raise InputError(f"bad diagram point {bd!r}")
                b, d = bd
                d = math.inf if d == "inf" else float(d)
                pairs.append(PersistencePair(k, float(b), d))
        for ent in obj.get("essential", []):
            k, b = ent[0], ent[1]
            pairs.append(PersistencePair(int(k), float(b), math.inf))
        return cls(pairs, zero_retained=True, units=units)

    @classmethod
    def from_json(cls, text: str) -> "PersistenceDiagram":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid diagram JSON: {exc}") from None
        return cls.from_json_obj(obj)
