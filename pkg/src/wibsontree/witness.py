"""Opening a commitment at one input and checking the opening.

A witness carries, for each level, the key on the side the input takes and
the aux value of the path node, plus the leaf payload.  The verifier walks
back from the leaf: knowing one child hash ``c`` and the revealed key, it
computes that half ``h`` and recovers the other half as ``h XOR aux``.
"""

from __future__ import annotations

import hmac
import struct
from dataclasses import dataclass

from .commitment import DEFAULT_HASHER, HASH_SIZE, CommitmentTree, SeedKeys, Sha256, xor
from .obdd import MAX_PAYLOAD, bit, check_word

_MAGIC = b"WTW1"
_HEADER = 4 + 2


class WitnessFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    n: int
    revealed_keys: tuple[bytes, ...]
    aux_values: tuple[bytes, ...]
    payload: bytes

    def __post_init__(self) -> None:
        if len(self.revealed_keys) != self.n or len(self.aux_values) != self.n:
            raise WitnessFormatError("witness needs one key and one aux value per level")
        if any(len(v) != HASH_SIZE for v in self.revealed_keys + self.aux_values):
            raise WitnessFormatError("keys and aux values are 32 bytes")
        if not 1 <= len(self.payload) <= MAX_PAYLOAD:
            raise WitnessFormatError("payload length outside [1, 63]")

    def encode(self) -> bytes:
        return b"".join(
            [_MAGIC, struct.pack(">H", self.n), *self.revealed_keys, *self.aux_values,
             struct.pack(">H", len(self.payload)), self.payload]
        )

    @classmethod
    def decode(cls, data: bytes) -> "Witness":
        if data[:4] != _MAGIC:
            raise WitnessFormatError("bad witness magic")
        if len(data) < _HEADER + 2:
            raise WitnessFormatError("truncated witness")
        (n,) = struct.unpack_from(">H", data, 4)
        body = _HEADER + 2 * HASH_SIZE * n
        if len(data) < body + 2:
            raise WitnessFormatError("truncated witness")
        (size,) = struct.unpack_from(">H", data, body)
        if len(data) != body + 2 + size:
            raise WitnessFormatError("payload length inconsistent with witness size")
        chunks = [data[_HEADER + HASH_SIZE * j : _HEADER + HASH_SIZE * (j + 1)] for j in range(2 * n)]
        return cls(n, tuple(chunks[:n]), tuple(chunks[n:]), data[body + 2 :])


def encoded_size(n: int, payload_len: int) -> int:
    return 8 + 64 * n + payload_len


def open_witness(tree: CommitmentTree, keys: SeedKeys, x: bytes) -> Witness:
    q = tree.diagram
    if keys.n != q.n:
        raise ValueError("keys do not match the committed diagram")
    path = q.path(x)
    revealed = tuple(keys.side(i, bit(x, i)) for i in range(q.n))
    aux = tuple(tree.node_aux[i][path[i]] for i in range(q.n))
    return Witness(q.n, revealed, aux, q.leaves[path[-1]])


def verify(root: bytes, x: bytes, w: Witness, hasher: Sha256 = DEFAULT_HASHER) -> bytes | None:
    """Return the opened payload, or ``None`` if the opening does not match ``root``.

    Length problems (root size, input size, pad bits) raise ``ValueError``.
    Any other failure is a plain rejection, with no hint of where it failed.
    """
    if len(root) != HASH_SIZE:
        raise ValueError("root hash must be 32 bytes")
    check_word(x, w.n)
    h_node = hasher(w.payload)
    for i in range(w.n - 1, -1, -1):
        half = hasher(h_node + w.revealed_keys[i])
        other = xor(half, w.aux_values[i])
        if bit(x, i):
            h_node = hasher(other + half)
        else:
            h_node = hasher(half + other)
    if hmac.compare_digest(h_node, root):
        return w.payload
    return None
