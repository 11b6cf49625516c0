"""Notary certificates binding a commitment root to a criterion schema."""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

VERSION = 1
ED25519 = 0x01
_TAG = b"WTCERT1"
_BODY = struct.Struct(">7sB32s32s32sQQB")


class CertificateFormatError(ValueError):
    pass


class Verdict(enum.Enum):
    VALID = "valid"
    EXPIRED = "expired"
    BAD_SIGNATURE = "bad_signature"
    UNSUPPORTED_ALGORITHM = "unsupported_algorithm"


@dataclass(frozen=True)
class Certificate:
    root_hash: bytes
    schema_id: bytes
    subject_id: bytes
    valid_from: int
    valid_to: int
    signature: bytes
    version: int = VERSION
    algorithm_id: int = ED25519

    def preimage(self) -> bytes:
        return _BODY.pack(_TAG, self.version, self.root_hash, self.schema_id, self.subject_id,
                          self.valid_from, self.valid_to, self.algorithm_id)

    def encode(self) -> bytes:
        return self.preimage() + struct.pack(">H", len(self.signature)) + self.signature

    @classmethod
    def decode(cls, data: bytes) -> "Certificate":
        if len(data) < _BODY.size + 2 or data[:7] != _TAG:
            raise CertificateFormatError("not a certificate")
        tag, version, root, schema, subject, start, end, alg = _BODY.unpack_from(data)
        (size,) = struct.unpack_from(">H", data, _BODY.size)
        sig = data[_BODY.size + 2 :]
        if len(sig) != size:
            raise CertificateFormatError("signature length mismatch")
        return cls(root, schema, subject, start, end, sig, version, alg)


def _check_fields(root: bytes, schema_id: bytes, subject_id: bytes, valid_from: int, valid_to: int) -> None:
    for name, v in (("root", root), ("schema_id", schema_id), ("subject_id", subject_id)):
        if len(v) != 32:
            raise ValueError(f"{name} must be 32 bytes")
    if not 0 <= valid_from <= valid_to < 1 << 64:
        raise ValueError("invalid validity window")


def issue(root: bytes, schema_id: bytes, subject_id: bytes, valid_from: int, valid_to: int,
          signing_key: Ed25519PrivateKey) -> Certificate:
    _check_fields(root, schema_id, subject_id, valid_from, valid_to)
    unsigned = Certificate(bytes(root), bytes(schema_id), bytes(subject_id), valid_from, valid_to, b"")
    sig = signing_key.sign(hashlib.sha256(unsigned.preimage()).digest())
    return Certificate(unsigned.root_hash, unsigned.schema_id, unsigned.subject_id,
                       valid_from, valid_to, sig)


def check(cert: Certificate, notary_key: Ed25519PublicKey, now: int) -> Verdict:
    if cert.algorithm_id != ED25519:
        return Verdict.UNSUPPORTED_ALGORITHM
    try:
        notary_key.verify(cert.signature, hashlib.sha256(cert.preimage()).digest())
    except InvalidSignature:
        return Verdict.BAD_SIGNATURE
    if not cert.valid_from <= now <= cert.valid_to:
        return Verdict.EXPIRED
    return Verdict.VALID


def private_key_from_bytes(raw: bytes) -> Ed25519PrivateKey:
    return Ed25519PrivateKey.from_private_bytes(raw)


def public_key_from_bytes(raw: bytes) -> Ed25519PublicKey:
    return Ed25519PublicKey.from_public_bytes(raw)


def public_key_bytes(key: Ed25519PrivateKey | Ed25519PublicKey) -> bytes:
    if isinstance(key, Ed25519PrivateKey):
        key = key.public_key()
    return key.public_bytes(Encoding.Raw, PublicFormat.Raw)
