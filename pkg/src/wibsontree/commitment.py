"""Per-level blinding keys and the hash commitment over a diagram.

Leaf hash is ``SHA256(payload)``.  An internal node at level ``i`` with child
hashes ``cL`` and ``cR`` gets::

    halfL = SHA256(cL || L_i)
    halfR = SHA256(cR || R_i)
    hash  = SHA256(halfL || halfR)
    aux   = halfL XOR halfR

Payloads are 1..63 bytes long and internal preimages are always 64 bytes, so
a leaf can never be confused with an internal node.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass, field

from .obdd import DiagramError, Qrobdd, MAX_LEVELS

HASH_SIZE = 32
SEED_SIZE = 32


class Sha256:
    """The hash primitive, injectable so tests can count invocations."""

    def __call__(self, data: bytes) -> bytes:
        return hashlib.sha256(data).digest()


class CountingSha256(Sha256):
    def __init__(self) -> None:
        self.calls = 0

    def __call__(self, data: bytes) -> bytes:
        self.calls += 1
        return hashlib.sha256(data).digest()


DEFAULT_HASHER = Sha256()


def xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


@dataclass(frozen=True)
class SeedKeys:
    """Key pairs ``(L_i, R_i)`` for every level.  Secret; kept out of repr."""

    seed: bytes = field(repr=False)
    n: int
    pairs: tuple[tuple[bytes, bytes], ...] = field(repr=False)

    def left(self, i: int) -> bytes:
        return self.pairs[i][0]

    def right(self, i: int) -> bytes:
        return self.pairs[i][1]

    def side(self, i: int, b: int) -> bytes:
        return self.pairs[i][b]


def derive_keys(seed: bytes, n: int) -> SeedKeys:
    """``L_i = HMAC-SHA256(seed, "WTL" || u32be(i))``, likewise ``R_i`` with ``"WTR"``."""
    if len(seed) != SEED_SIZE:
        raise ValueError(f"seed must be {SEED_SIZE} bytes")
    if not 0 <= n <= MAX_LEVELS:
        raise ValueError(f"level count {n} outside [0, {MAX_LEVELS}]")
    pairs = []
    for i in range(n):
        idx = struct.pack(">I", i)
        left = hmac.digest(seed, b"WTL" + idx, "sha256")
        right = hmac.digest(seed, b"WTR" + idx, "sha256")
        if left == right:
            raise ValueError(f"degenerate key pair at level {i}")
        pairs.append((left, right))
    return SeedKeys(bytes(seed), n, tuple(pairs))


def hash_internal(c_left: bytes, c_right: bytes, k_left: bytes, k_right: bytes,
                  hasher: Sha256 = DEFAULT_HASHER) -> tuple[bytes, bytes]:
    """Return ``(hash, aux)`` of an internal node."""
    for v in (c_left, c_right, k_left, k_right):
        if len(v) != HASH_SIZE:
            raise ValueError("hash_internal inputs must be 32 bytes each")
    half_l = hasher(c_left + k_left)
    half_r = hasher(c_right + k_right)
    return hasher(half_l + half_r), xor(half_l, half_r)


@dataclass(frozen=True)
class CommitmentTree:
    diagram: Qrobdd
    node_hash: tuple[tuple[bytes, ...], ...]
    node_aux: tuple[tuple[bytes, ...], ...]
    leaf_hash: tuple[bytes, ...]
    root_hash: bytes


def commit(q: Qrobdd, keys: SeedKeys, hasher: Sha256 = DEFAULT_HASHER) -> CommitmentTree:
    """Hash every DAG node once, bottom-up."""
    if keys.n != q.n:
        raise ValueError(f"keys cover {keys.n} levels, diagram has {q.n}")
    leaf_hash = tuple(hasher(p) for p in q.leaves)
    below = leaf_hash
    hashes = []
    auxes = []
    for i in range(q.n - 1, -1, -1):
        k_left, k_right = keys.pairs[i]
        level_h = []
        level_a = []
        for lo, hi in q.levels[i]:
            h, a = hash_internal(below[lo], below[hi], k_left, k_right, hasher)
            level_h.append(h)
            level_a.append(a)
        below = tuple(level_h)
        hashes.append(below)
        auxes.append(tuple(level_a))
    hashes.reverse()
    auxes.reverse()
    root = hashes[0][q.root] if q.n else leaf_hash[q.root]
    return CommitmentTree(q, tuple(hashes), tuple(auxes), leaf_hash, root)


def verify_full(root: bytes, q: Qrobdd, keys: SeedKeys) -> bool:
    """Check a fully revealed function (diagram plus every key) against a root."""
    if keys.n != q.n:
        return False
    return hmac.compare_digest(commit(q, keys).root_hash, root)


# -- WTC-TREE1 file format --------------------------------------------------

_MAGIC = b"WTC-TREE1"


def dumps(tree: CommitmentTree) -> bytes:
    """Serialize hashes and aux values; node counts precede each array."""
    out = bytearray(_MAGIC)
    out += struct.pack(">H", tree.diagram.n)
    out += tree.root_hash
    for hs, aux in zip(tree.node_hash, tree.node_aux):
        out += struct.pack(">I", len(hs))
        for h, a in zip(hs, aux):
            out += h + a
    out += struct.pack(">H", len(tree.leaf_hash))
    for h in tree.leaf_hash:
        out += h
    return bytes(out)


def loads(data: bytes, q: Qrobdd) -> CommitmentTree:
    """Parse a tree file and attach it to its diagram, checking consistency."""
    if data[: len(_MAGIC)] != _MAGIC:
        raise DiagramError("not a WTC-TREE1 file")
    try:
        pos = len(_MAGIC)
        (n,) = struct.unpack_from(">H", data, pos)
        pos += 2
        root = data[pos : pos + HASH_SIZE]
        pos += HASH_SIZE
        if n != q.n:
            raise DiagramError("tree and diagram level counts differ")
        hashes, auxes = [], []
        for i in range(n):
            (count,) = struct.unpack_from(">I", data, pos)
            pos += 4
            if count != len(q.levels[i]):
                raise DiagramError(f"tree level {i} does not match the diagram")
            hs, aux = [], []
            for _ in range(count):
                hs.append(data[pos : pos + HASH_SIZE])
                aux.append(data[pos + HASH_SIZE : pos + 2 * HASH_SIZE])
                pos += 2 * HASH_SIZE
            hashes.append(tuple(hs))
            auxes.append(tuple(aux))
        (nleaves,) = struct.unpack_from(">H", data, pos)
        pos += 2
        if nleaves != len(q.leaves):
            raise DiagramError("tree leaf count does not match the diagram")
        leaves = tuple(data[pos + HASH_SIZE * j : pos + HASH_SIZE * (j + 1)] for j in range(nleaves))
        pos += HASH_SIZE * nleaves
    except struct.error as exc:
        raise DiagramError("truncated tree file") from exc
    if pos != len(data):
        raise DiagramError("tree file has wrong length")
    top = hashes[0][q.root] if n else leaves[q.root]
    if top != root:
        raise DiagramError("stored root does not match the root node hash")
    return CommitmentTree(q, tuple(hashes), tuple(auxes), leaves, bytes(root))
