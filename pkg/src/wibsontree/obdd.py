"""Quasi-reduced ordered binary decision diagrams.

Every root-to-leaf path visits every level exactly once: level ``i`` tests
input bit ``i`` and its nodes point into level ``i + 1`` (or into the leaf
table from the last level).  Nodes are ``(lo, hi)`` index pairs; ``lo`` is
taken when the bit is 0.

Inputs are byte strings holding the bits MSB-first, with zero padding in
the last byte.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable, Sequence

MAX_LEVELS = 4096
MAX_PAYLOAD = 63
MAX_TRUTH_TABLE_LEVELS = 20

FALSE = b"\x00"
TRUE = b"\x01"

Node = tuple[int, int]


class DiagramError(ValueError):
    pass


# -- input words ------------------------------------------------------------


def word_length(n: int) -> int:
    return (n + 7) // 8


def input_word(value: int, n: int) -> bytes:
    """Encode the integer ``value`` as an ``n``-bit MSB-first input word."""
    if value < 0 or value >> n:
        raise DiagramError(f"value {value} does not fit in {n} bits")
    pad = 8 * word_length(n) - n
    return (value << pad).to_bytes(word_length(n), "big")


def word_value(x: bytes, n: int) -> int:
    check_word(x, n)
    pad = 8 * word_length(n) - n
    return int.from_bytes(x, "big") >> pad


def check_word(x: bytes, n: int) -> None:
    if len(x) != word_length(n):
        raise DiagramError(f"input has {len(x)} bytes, expected {word_length(n)} for {n} bits")
    pad = 8 * len(x) - n
    if pad and x[-1] & ((1 << pad) - 1):
        raise DiagramError("input pad bits must be zero")


def bit(x: bytes, i: int) -> int:
    return (x[i >> 3] >> (7 - (i & 7))) & 1


def bits(x: bytes, n: int) -> list[int]:
    check_word(x, n)
    return [bit(x, i) for i in range(n)]


# -- the diagram ------------------------------------------------------------


def _check_payload(p: bytes) -> None:
    if not isinstance(p, (bytes, bytearray)):
        raise DiagramError(f"payload must be bytes, got {type(p).__name__}")
    if not 1 <= len(p) <= MAX_PAYLOAD:
        raise DiagramError(f"payload length {len(p)} outside [1, {MAX_PAYLOAD}]")


@dataclass(frozen=True)
class Qrobdd:
    n: int
    levels: tuple[tuple[Node, ...], ...]
    leaves: tuple[bytes, ...]
    root: int

    def __post_init__(self) -> None:
        if not 0 <= self.n <= MAX_LEVELS:
            raise DiagramError(f"level count {self.n} outside [0, {MAX_LEVELS}]")
        if len(self.levels) != self.n:
            raise DiagramError("one node table per level is required")
        if not self.leaves:
            raise DiagramError("diagram has no leaves")
        for p in self.leaves:
            _check_payload(p)
        if len(set(self.leaves)) != len(self.leaves):
            raise DiagramError("leaf payloads must be distinct")
        top = len(self.levels[0]) if self.n else len(self.leaves)
        if not 0 <= self.root < top:
            raise DiagramError("root index out of range")
        for i, table in enumerate(self.levels):
            if not table:
                raise DiagramError(f"level {i} is empty")
            below = len(self.levels[i + 1]) if i + 1 < self.n else len(self.leaves)
            for lo, hi in table:
                if not (0 <= lo < below and 0 <= hi < below):
                    raise DiagramError(f"edge from level {i} leaves the next table")

    def node_count(self) -> int:
        return sum(len(t) for t in self.levels)

    def width(self) -> list[int]:
        return [len(t) for t in self.levels]

    def is_boolean(self) -> bool:
        return all(p in (FALSE, TRUE) for p in self.leaves)

    def path(self, x: bytes) -> list[int]:
        """Node indices visited by ``x``, one per level, then the leaf index."""
        check_word(x, self.n)
        idx = self.root
        out = []
        for i, table in enumerate(self.levels):
            out.append(idx)
            idx = table[idx][bit(x, i)]
        out.append(idx)
        return out

    def evaluate(self, x: bytes) -> bytes:
        return self.leaves[self.path(x)[-1]]

    def check_reachable(self) -> None:
        seen = {self.root}
        for i, table in enumerate(self.levels):
            if len(seen) != len(table):
                raise DiagramError(f"level {i} has unreachable nodes")
            seen = {c for j in seen for c in table[j]}
        if len(seen) != len(self.leaves):
            raise DiagramError("unreachable leaves")


def evaluate(q: Qrobdd, x: bytes) -> bytes:
    return q.evaluate(x)


def constant(n: int, payload: bytes = TRUE) -> Qrobdd:
    return Qrobdd(n, tuple(((0, 0),) for _ in range(n)), (bytes(payload),), 0)


# -- construction -----------------------------------------------------------


def build_layered(
    n: int,
    step: Callable[[int, bytes, int], bytes],
    initial: bytes,
    finalize: Callable[[bytes], bytes],
) -> Qrobdd:
    """Forward layered construction from a transition oracle.

    States are byte strings; states with equal codes at one level share a
    node.  Canonicalizing codes so that equivalent states compare equal is
    the caller's job; :func:`reduce` merges whatever is left.
    """
    if not 0 <= n <= MAX_LEVELS:
        raise DiagramError(f"level count {n} outside [0, {MAX_LEVELS}]")
    states = [initial]
    levels = []
    for i in range(n):
        index: dict[bytes, int] = {}
        nxt: list[bytes] = []
        table = []
        for s in states:
            pair = []
            for b in (0, 1):
                t = step(i, s, b)
                j = index.get(t)
                if j is None:
                    j = index[t] = len(nxt)
                    nxt.append(t)
                pair.append(j)
            table.append((pair[0], pair[1]))
        levels.append(tuple(table))
        states = nxt

    leaves: list[bytes] = []
    leaf_index: dict[bytes, int] = {}
    remap = []
    for s in states:
        p = bytes(finalize(s))
        _check_payload(p)
        if p not in leaf_index:
            leaf_index[p] = len(leaves)
            leaves.append(p)
        remap.append(leaf_index[p])
    if n:
        levels[-1] = tuple((remap[lo], remap[hi]) for lo, hi in levels[-1])
        root = 0
    else:
        root = remap[0]
    return Qrobdd(n, tuple(levels), tuple(leaves), root)


def from_truth_table(table: Sequence[bytes], n: int) -> Qrobdd:
    """Reduced diagram whose entry ``k`` is the value at input word ``k``."""
    if len(table) != 1 << n:
        raise DiagramError(f"truth table needs {1 << n} entries")
    # state = (level, prefix value); reduce() does the merging
    def step(i, s, b):
        return ((int.from_bytes(s, "big") << 1) | b).to_bytes(4, "big")

    q = build_layered(n, step, bytes(4), lambda s: table[int.from_bytes(s, "big")])
    return reduce(q)


def expand(q: Qrobdd) -> Qrobdd:
    """The full uncompressed tree for ``q``: level ``i`` holds ``2**i`` nodes."""
    if q.n > MAX_TRUTH_TABLE_LEVELS:
        raise DiagramError("full tree too large")
    levels = []
    frontier = [q.root]
    for i, table in enumerate(q.levels):
        levels.append(tuple((2 * k, 2 * k + 1) for k in range(len(frontier))))
        frontier = [c for j in frontier for c in table[j]]
    if q.n:
        levels[-1] = tuple((frontier[2 * k], frontier[2 * k + 1]) for k in range(len(levels[-1])))
        return Qrobdd(q.n, tuple(levels), q.leaves, 0)
    return q


# -- reduction --------------------------------------------------------------


def reduce(q: Qrobdd) -> Qrobdd:
    """Merge equivalent nodes level by level and drop unreachable ones.

    Node and leaf indices in the result are assigned in breadth-first order
    from the root (``lo`` before ``hi``), so two reduced diagrams of the same
    function are equal field for field.
    """
    # bottom-up: class id of every node, by (class(lo), class(hi))
    classes: list[list[int]] = [list(range(len(q.leaves)))]
    reps: list[list[Node]] = []
    for table in reversed(q.levels):
        below = classes[-1]
        ids: dict[Node, int] = {}
        cls = []
        rep = []
        for lo, hi in table:
            key = (below[lo], below[hi])
            if key not in ids:
                ids[key] = len(rep)
                rep.append(key)
            cls.append(ids[key])
        classes.append(cls)
        reps.append(rep)
    classes.reverse()
    reps.reverse()

    # top-down: renumber in discovery order
    order = [classes[0][q.root]]
    levels = []
    for i in range(q.n):
        pos: dict[int, int] = {}
        nxt: list[int] = []
        table = []
        for c in order:
            pair = []
            for child in reps[i][c]:
                if child not in pos:
                    pos[child] = len(nxt)
                    nxt.append(child)
                pair.append(pos[child])
            table.append((pair[0], pair[1]))
        levels.append(tuple(table))
        order = nxt
    leaves = tuple(q.leaves[c] for c in order)
    return Qrobdd(q.n, tuple(levels), leaves, 0)


# -- boolean operations -----------------------------------------------------

_OPS = {
    "AND": lambda a, b: a & b,
    "OR": lambda a, b: a | b,
    "XOR": lambda a, b: a ^ b,
}


def _require_boolean(q: Qrobdd) -> None:
    if not q.is_boolean():
        raise DiagramError("boolean payloads (0x00/0x01) required")


def apply(a: Qrobdd, b: Qrobdd, op: str) -> Qrobdd:
    """Combine two boolean diagrams with AND, OR or XOR; result is reduced."""
    fn = _OPS.get(op.upper())
    if fn is None:
        raise DiagramError(f"unsupported connective {op!r}")
    if a.n != b.n:
        raise DiagramError(f"level count mismatch: {a.n} vs {b.n}")
    _require_boolean(a)
    _require_boolean(b)
    pack = struct.Struct(">II")

    def step(i, s, bitval):
        x, y = pack.unpack(s)
        return pack.pack(a.levels[i][x][bitval], b.levels[i][y][bitval])

    def finalize(s):
        x, y = pack.unpack(s)
        return bytes([fn(a.leaves[x][0], b.leaves[y][0])])

    return reduce(build_layered(a.n, step, pack.pack(a.root, b.root), finalize))


def negate(q: Qrobdd) -> Qrobdd:
    _require_boolean(q)
    flipped = tuple(TRUE if p == FALSE else FALSE for p in q.leaves)
    return Qrobdd(q.n, q.levels, flipped, q.root)


def truth_table(q: Qrobdd) -> list[bytes]:
    if q.n > MAX_TRUTH_TABLE_LEVELS:
        raise DiagramError(f"truth table limited to n <= {MAX_TRUTH_TABLE_LEVELS}")
    below: list[list[bytes]] = [[p] for p in q.leaves]
    for table in reversed(q.levels):
        below = [below[lo] + below[hi] for lo, hi in table]
    return below[q.root]


# -- WTD1 file format -------------------------------------------------------

_MAGIC = b"WTD1"


def dumps(q: Qrobdd) -> bytes:
    out = bytearray(_MAGIC)
    out += struct.pack(">H", q.n)
    for table in q.levels:
        out += struct.pack(">I", len(table))
        for lo, hi in table:
            out += struct.pack(">II", lo, hi)
    out += struct.pack(">H", len(q.leaves))
    for p in q.leaves:
        out += bytes([len(p)]) + p
    out += struct.pack(">I", q.root)
    return bytes(out)


def loads(data: bytes) -> Qrobdd:
    if data[:4] != _MAGIC:
        raise DiagramError("not a WTD1 diagram")
    try:
        pos = 4
        (n,) = struct.unpack_from(">H", data, pos)
        pos += 2
        levels = []
        for _ in range(n):
            (count,) = struct.unpack_from(">I", data, pos)
            pos += 4
            if pos + 8 * count > len(data):
                raise DiagramError("truncated diagram")
            flat = struct.unpack_from(f">{2 * count}I", data, pos)
            pos += 8 * count
            levels.append(tuple(zip(flat[0::2], flat[1::2])))
        (nleaves,) = struct.unpack_from(">H", data, pos)
        pos += 2
        leaves = []
        for _ in range(nleaves):
            size = data[pos]
            leaves.append(bytes(data[pos + 1 : pos + 1 + size]))
            if len(leaves[-1]) != size:
                raise DiagramError("truncated leaf")
            pos += 1 + size
        (root,) = struct.unpack_from(">I", data, pos)
        pos += 4
    except (struct.error, IndexError) as exc:
        raise DiagramError("truncated diagram") from exc
    if pos != len(data):
        raise DiagramError("trailing bytes after diagram")
    q = Qrobdd(n, tuple(levels), tuple(leaves), root)
    q.check_reachable()
    return q
