"""Criterion schemas: how a buyer's query is laid out as diagram input bits."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .obdd import input_word, word_value

ENCODINGS = ("unsigned-int", "id-slot", "cell-slot")


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    name: str
    offset: int
    width: int
    encoding: str = "unsigned-int"


@dataclass(frozen=True)
class CriterionSchema:
    name: str
    n: int
    fields: tuple[FieldSpec, ...]

    def __post_init__(self) -> None:
        pos = 0
        names = set()
        for f in self.fields:
            if f.encoding not in ENCODINGS:
                raise SchemaError(f"unknown encoding {f.encoding!r}")
            if f.offset != pos or f.width < 1:
                raise SchemaError(f"field {f.name!r} does not tile the input")
            if f.name in names:
                raise SchemaError(f"duplicate field {f.name!r}")
            names.add(f.name)
            pos += f.width
        if pos != self.n:
            raise SchemaError(f"fields cover {pos} bits, schema declares {self.n}")

    def canonical(self) -> bytes:
        doc = {
            "name": self.name,
            "n": self.n,
            "fields": [[f.name, f.offset, f.width, f.encoding] for f in self.fields],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()

    @property
    def schema_id(self) -> bytes:
        return hashlib.sha256(self.canonical()).digest()

    def field(self, name: str) -> FieldSpec:
        for f in self.fields:
            if f.name == name:
                return f
        raise SchemaError(f"no field {name!r} in schema {self.name!r}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "fields": [
                {"name": f.name, "offset": f.offset, "width": f.width, "encoding": f.encoding}
                for f in self.fields
            ],
            "schema_id": self.schema_id.hex(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CriterionSchema":
        try:
            fields = tuple(
                FieldSpec(f["name"], int(f["offset"]), int(f["width"]), f["encoding"])
                for f in doc["fields"]
            )
            schema = cls(doc["name"], int(doc["n"]), fields)
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema: {exc}") from exc
        if "schema_id" in doc and doc["schema_id"] != schema.schema_id.hex():
            raise SchemaError("schema_id does not match the field layout")
        return schema

    def pack(self, values: dict) -> bytes:
        """Pack named field values into an input word.

        Slot fields default to 0 (the empty slot); a cell slot may be given
        as ``[depth, prefix]``.  Plain integer fields are required.
        """
        unknown = set(values) - {f.name for f in self.fields}
        if unknown:
            raise SchemaError(f"unknown fields: {sorted(unknown)}")
        acc = 0
        for f in self.fields:
            if f.name not in values:
                if f.encoding == "unsigned-int":
                    raise SchemaError(f"missing field {f.name!r}")
                v = 0
            else:
                v = values[f.name]
            if f.encoding == "cell-slot" and isinstance(v, (list, tuple)):
                depth, prefix = v
                v = (int(depth) << (f.width - 8)) | int(prefix)
            v = int(v)
            if not 0 <= v < 1 << f.width:
                raise SchemaError(f"value for {f.name!r} does not fit {f.width} bits")
            acc = (acc << f.width) | v
        return input_word(acc, self.n)

    def unpack(self, x: bytes) -> dict:
        acc = word_value(x, self.n)
        out = {}
        for f in self.fields:
            shift = self.n - f.offset - f.width
            out[f.name] = (acc >> shift) & ((1 << f.width) - 1)
        return out


def uint_fields(name: str, *fields: tuple[str, int]) -> CriterionSchema:
    specs = []
    pos = 0
    for fname, width in fields:
        specs.append(FieldSpec(fname, pos, width))
        pos += width
    return CriterionSchema(name, pos, tuple(specs))


def slot_fields(name: str, prefix: str, k: int, width: int, encoding: str) -> CriterionSchema:
    return CriterionSchema(
        name, k * width, tuple(FieldSpec(f"{prefix}{j}", j * width, width, encoding) for j in range(k))
    )
