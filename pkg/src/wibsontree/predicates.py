"""JSON predicate documents: compile a seller's predicate and encode buyer criteria.

A predicate document names its family in ``"type"`` and carries the
seller's attribute values plus the encoding widths::

    {"type": "ageInRange", "age": 25, "width": 8}
    {"type": "bankBalanceAtLeast", "balance": 23, "width": 16}
    {"type": "visitedAnySite", "history": ["a.com"], "slots": 3, "id_bits": 16}
    {"type": "houseInPoly", "lat": 1200, "lon": 800, "slots": 8, "width": 12}
    {"type": "dfa", "n": 8, "initial": 0, "transitions": [[0, 1], [1, 0]], "accept": [true, false]}
    {"type": "wildcardSet", "n": 4, "patterns": ["01**", "**10"]}
"""

from __future__ import annotations

import hashlib
from typing import Any

from . import compilers, spatial
from .compilers import CompileError, Dfa
from .obdd import FALSE, TRUE, Qrobdd
from .schema import CriterionSchema, SchemaError, slot_fields, uint_fields

TYPES = ("ageInRange", "bankBalanceAtLeast", "visitedAnySite", "houseInPoly", "dfa", "wildcardSet")


def site_id(domain: str, bits: int) -> int:
    """Map a domain name to a nonzero ``bits``-bit identifier via truncated SHA-256.

    Distinct domains may collide; a collision only widens the match.
    """
    if bits < 2:
        raise CompileError("site identifiers need at least 2 bits")
    digest = int.from_bytes(hashlib.sha256(domain.strip().lower().encode()).digest(), "big")
    return digest % ((1 << bits) - 1) + 1


def _payload(v: Any) -> bytes:
    if isinstance(v, bool):
        return TRUE if v else FALSE
    if isinstance(v, str):
        return bytes.fromhex(v)
    raise CompileError(f"acceptance value must be a boolean or hex string, got {v!r}")


def _get(doc: dict, key: str) -> Any:
    try:
        return doc[key]
    except KeyError:
        raise CompileError(f"{doc.get('type')} predicate needs {key!r}") from None


def schema_for(doc: dict) -> CriterionSchema:
    kind = doc.get("type")
    if kind == "ageInRange":
        w = int(_get(doc, "width"))
        return uint_fields(kind, ("minAge", w), ("maxAge", w))
    if kind == "bankBalanceAtLeast":
        return uint_fields(kind, ("minBalance", int(_get(doc, "width"))))
    if kind == "visitedAnySite":
        return slot_fields(kind, "site", int(_get(doc, "slots")), int(_get(doc, "id_bits")), "id-slot")
    if kind == "houseInPoly":
        width = compilers.cell_slot_width(int(_get(doc, "width")))
        return slot_fields(kind, "cell", int(_get(doc, "slots")), width, "cell-slot")
    if kind in ("dfa", "wildcardSet"):
        return uint_fields(kind, ("x", int(_get(doc, "n"))))
    raise CompileError(f"unknown predicate type {kind!r}; expected one of {', '.join(TYPES)}")


def compile_predicate(doc: dict) -> tuple[Qrobdd, CriterionSchema]:
    schema = schema_for(doc)
    kind = doc["type"]
    if kind == "ageInRange":
        q = compilers.compile_range_membership(int(_get(doc, "age")), int(doc["width"]))
    elif kind == "bankBalanceAtLeast":
        q = compilers.compile_at_least(int(_get(doc, "balance")), int(doc["width"]))
    elif kind == "visitedAnySite":
        b = int(doc["id_bits"])
        ids = {site_id(d, b) for d in doc.get("history", [])}
        ids |= {int(v) for v in doc.get("ids", [])}
        q = compilers.compile_any_slot_in_set(ids, int(doc["slots"]), b)
    elif kind == "houseInPoly":
        q = compilers.compile_point_in_cells(
            int(_get(doc, "lat")), int(_get(doc, "lon")), int(doc["slots"]), int(doc["width"])
        )
    elif kind == "dfa":
        d = Dfa(
            tuple((int(a), int(b)) for a, b in _get(doc, "transitions")),
            int(doc.get("initial", 0)),
            tuple(_payload(v) for v in _get(doc, "accept")),
        )
        q = compilers.compile_dfa(d, int(doc["n"]))
    else:
        d = compilers.wildcard_set_to_dfa(_get(doc, "patterns"), int(doc["n"]))
        q = compilers.compile_dfa(d, int(doc["n"]))
    assert q.n == schema.n
    return q, schema


def encode_criterion(schema: CriterionSchema, values: dict) -> bytes:
    """Pack a buyer's criterion into an input word for ``schema``.

    Besides raw field values, two conveniences are understood: ``"sites"``
    (domain names for id slots) and ``"polygons"`` (convex polygons for cell
    slots, converted to a quadtree cover).
    """
    values = dict(values)
    if "sites" in values:
        slots = [f for f in schema.fields if f.encoding == "id-slot"]
        sites = values.pop("sites")
        if len(sites) > len(slots):
            raise SchemaError(f"{len(sites)} sites do not fit {len(slots)} slots")
        for f, name in zip(slots, sites):
            values[f.name] = site_id(name, f.width)
    if "polygons" in values:
        slots = [f for f in schema.fields if f.encoding == "cell-slot"]
        if not slots:
            raise SchemaError("schema has no cell slots")
        w = (slots[0].width - 8) // 2
        cover = spatial.polygons_to_cells(values.pop("polygons"), len(slots), w)
        for f, cell in zip(slots, cover.cells):
            values[f.name] = cell
    return schema.pack(values)
