"""Compile seller-attribute predicates into diagrams over the buyer's criterion.

The criterion is the diagram input; the seller's own attribute value is
baked into the diagram's structure.  Each compiler returns a reduced
:class:`~wibsontree.obdd.Qrobdd` with boolean payloads.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .obdd import FALSE, TRUE, DiagramError, Qrobdd, build_layered, reduce

MAX_CELL_BITS = 32


class CompileError(ValueError):
    pass


def _msb_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - j)) & 1 for j in range(width)]


def _check_attr(attr: int, w: int) -> None:
    if w < 1:
        raise CompileError("field width must be positive")
    if not 0 <= attr < 1 << w:
        raise CompileError(f"attribute {attr} does not fit in {w} bits")


def _boolean_finalize(accepting: Iterable[bytes]):
    accepting = frozenset(accepting)
    return lambda s: TRUE if s in accepting else FALSE


# -- integer comparisons ----------------------------------------------------


def compile_range_membership(attr: int, w: int) -> Qrobdd:
    """True on ``X = min || max`` (``w`` bits each) iff ``min <= attr <= max``."""
    _check_attr(attr, w)
    a = _msb_bits(attr, w)

    # min phase: L (min < attr), E (equal so far), D (dead)
    # max phase: e (equal so far), g (max > attr), D
    def step(i, s, b):
        if s == b"D":
            return s
        if i < w:
            if s == b"E" and b != a[i]:
                s = b"L" if b < a[i] else b"D"
            if i == w - 1 and s != b"D":
                return b"e"
            return s
        if s == b"e" and b != a[i - w]:
            return b"g" if b > a[i - w] else b"D"
        return s

    return reduce(build_layered(2 * w, step, b"E", _boolean_finalize([b"e", b"g"])))


def compile_at_least(attr: int, w: int) -> Qrobdd:
    """True on ``X = threshold`` iff ``attr >= threshold``."""
    _check_attr(attr, w)
    a = _msb_bits(attr, w)

    def step(i, s, b):
        if s == b"E" and b != a[i]:
            return b"G" if b < a[i] else b"D"
        return s

    return reduce(build_layered(w, step, b"E", _boolean_finalize([b"E", b"G"])))


# -- identifier sets --------------------------------------------------------


def compile_any_slot_in_set(attr_set: Iterable[int], k: int, b: int) -> Qrobdd:
    """True iff any of the ``k`` ``b``-bit slots of ``X`` holds a member of ``attr_set``.

    The all-zero slot means "empty" and never matches, so 0 cannot be a member.
    """
    members = frozenset(int(v) for v in attr_set)
    if not members:
        raise CompileError("identifier set is empty")
    if 0 in members:
        raise CompileError("0 is the reserved empty slot value")
    if k < 1 or b < 1:
        raise CompileError("slot count and slot width must be positive")
    if any(not 0 < v < 1 << b for v in members):
        raise CompileError(f"identifiers must fit in {b} bits")
    prefixes = [frozenset(v >> (b - d) for v in members) for d in range(b + 1)]
    start = b"P" + bytes(8)

    def step(i, s, bit):
        if s == b"F":
            return s
        j = i % b
        if s != b"N":
            v = (int.from_bytes(s[1:], "big") << 1) | bit
            if v in prefixes[j + 1]:
                if j == b - 1:
                    return b"F"
                return b"P" + v.to_bytes(8, "big")
        return start if j == b - 1 else b"N"

    return reduce(build_layered(k * b, step, start, _boolean_finalize([b"F"])))


# -- spatial cells ----------------------------------------------------------


def morton(lat: int, lon: int, w: int) -> int:
    """Interleave two ``w``-bit coordinates, latitude bit first, MSB-first."""
    if not (0 <= lat < 1 << w and 0 <= lon < 1 << w):
        raise CompileError(f"coordinates must fit in {w} bits")
    m = 0
    for j in range(w - 1, -1, -1):
        m = (m << 2) | (((lat >> j) & 1) << 1) | ((lon >> j) & 1)
    return m


def unmorton(m: int, w: int) -> tuple[int, int]:
    lat = lon = 0
    for j in range(w - 1, -1, -1):
        lat = (lat << 1) | ((m >> (2 * j + 1)) & 1)
        lon = (lon << 1) | ((m >> (2 * j)) & 1)
    return lat, lon


def cell_slot_width(w: int) -> int:
    return 8 + 2 * w


def compile_point_in_cells(lat: int, lon: int, k: int, w: int) -> Qrobdd:
    """True iff some slot ``(depth, prefix)`` of ``X`` is a cell holding the point.

    A slot is an 8-bit depth ``d`` followed by a ``2w``-bit Morton prefix.  It
    matches when ``1 <= d <= 2w`` and the first ``d`` prefix bits agree with
    the point's Morton code; bits past ``d`` are not inspected.  ``d = 0``
    marks an empty slot.
    """
    if not 1 <= w <= MAX_CELL_BITS:
        raise CompileError(f"coordinate width must be in [1, {MAX_CELL_BITS}]")
    if k < 1:
        raise CompileError("slot count must be positive")
    code = _msb_bits(morton(lat, lon, w), 2 * w)
    size = cell_slot_width(w)
    top = 2 * w
    start = b"d\x00"

    # states: F found; N slot missed; d<partial depth>; c<depth> prefix matching
    def step(i, s, bit):
        if s == b"F":
            return s
        j = i % size
        nxt = b"N"
        if j < 8:
            if s[:1] == b"d":
                d = (s[1] << 1) | bit
                if j == 7:
                    if 1 <= d <= top:
                        nxt = b"c" + bytes([d])
                elif d << (7 - j) <= top:
                    nxt = b"d" + bytes([d])
        elif s[:1] == b"c":
            p = j - 8
            if bit == code[p]:
                nxt = b"F" if p + 1 == s[1] else s
        if nxt != b"F" and j == size - 1:
            return start
        return nxt

    return reduce(build_layered(k * size, step, start, _boolean_finalize([b"F"])))


# -- automata ---------------------------------------------------------------


@dataclass(frozen=True)
class Dfa:
    """Binary DFA: ``transitions[s] = (next on 0, next on 1)``; ``accept[s]`` is a payload."""

    transitions: tuple[tuple[int, int], ...]
    initial: int
    accept: tuple[bytes, ...]

    def __post_init__(self) -> None:
        count = len(self.transitions)
        if count == 0 or len(self.accept) != count:
            raise CompileError("transition table and acceptance map must cover every state")
        if not 0 <= self.initial < count:
            raise CompileError("initial state out of range")
        for t in self.transitions:
            if len(t) != 2 or not all(0 <= v < count for v in t):
                raise CompileError("transition table is not total")

    @property
    def states(self) -> int:
        return len(self.transitions)

    def run(self, bits: Sequence[int]) -> bytes:
        s = self.initial
        for b in bits:
            s = self.transitions[s][b]
        return self.accept[s]


def compile_dfa(d: Dfa, n: int) -> Qrobdd:
    pack = struct.Struct(">I")

    def step(i, s, b):
        return pack.pack(d.transitions[pack.unpack(s)[0]][b])

    try:
        q = build_layered(n, step, pack.pack(d.initial), lambda s: d.accept[pack.unpack(s)[0]])
    except DiagramError as exc:
        raise CompileError(str(exc)) from exc
    return reduce(q)


def wildcard_set_to_dfa(patterns: Iterable[str], n: int) -> Dfa:
    """DFA accepting the length-``n`` words matched by any pattern over ``0``, ``1``, ``*``.

    States are ``(position, set of remaining pattern suffixes)``; all dead
    configurations share a single sink.
    """
    pats = []
    for p in patterns:
        if len(p) != n:
            raise CompileError(f"pattern {p!r} does not have length {n}")
        if set(p) - set("01*"):
            raise CompileError(f"pattern {p!r} uses symbols other than 0, 1, *")
        pats.append(p)

    dead = (None, frozenset())
    first = (0, frozenset(pats)) if pats else dead
    index = {first: 0}
    order = [first]
    transitions: list[tuple[int, int]] = []
    queue = deque([first])

    def intern(state):
        if state not in index:
            index[state] = len(order)
            order.append(state)
            queue.append(state)
        return index[state]

    while queue:
        pos, alive = state = queue.popleft()
        if state == dead or pos == n:
            transitions.append((index[state], index[state]))
            continue
        pair = []
        for b in "01":
            nxt = frozenset(p[1:] for p in alive if p[0] in (b, "*"))
            pair.append(intern((pos + 1, nxt) if nxt else dead))
        transitions.append((pair[0], pair[1]))

    accept = tuple(TRUE if s != dead and s[0] == n else FALSE for s in order)
    return Dfa(tuple(transitions), 0, accept)


def wildcard_matches(pattern: str, bits: Sequence[int]) -> bool:
    return all(c == "*" or int(c) == b for c, b in zip(pattern, bits))
