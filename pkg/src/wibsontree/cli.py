"""Command-line workflow for notaries, sellers and buyers.

Exit codes: 0 success/accept, 2 reject or invalid certificate, 1 usage or
structural error.  Secrets (seeds, notary keys) are read from files named
by an option or by ``WT_SEED_FILE`` / ``WT_NOTARY_KEY_FILE``, never argv.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import time

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from . import certificate, commitment, obdd, predicates
from .schema import CriterionSchema
from .witness import Witness, open_witness, verify

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _write_bytes(path: str, data: bytes) -> None:
    with open(path, "wb") as f:
        f.write(data)


def _hex_arg(value: str, size: int | None, what: str) -> bytes:
    try:
        raw = bytes.fromhex(value.strip())
    except ValueError:
        raise ValueError(f"{what} is not valid hex") from None
    if size is not None and len(raw) != size:
        raise ValueError(f"{what} must be {size} bytes, got {len(raw)}")
    return raw


def _read_secret(path: str | None, env: str, what: str) -> bytes:
    path = path or os.environ.get(env)
    if not path:
        raise UsageError(f"no {what} file: pass --{what}-file or set {env}")
    data = _read_bytes(path)
    if len(data) == 32:
        return data
    return _hex_arg(data.decode("ascii", "replace"), 32, what)


def _load_schema(path: str) -> CriterionSchema:
    with open(path) as f:
        return CriterionSchema.from_json(json.load(f))


def _json_arg(value: str):
    if value.startswith("@"):
        with open(value[1:]) as f:
            return json.load(f)
    return json.loads(value)


def _criterion(args, n: int | None) -> bytes:
    if args.x_hex is not None:
        x = _hex_arg(args.x_hex, None, "criterion")
    else:
        if not args.schema:
            raise UsageError("--x-json needs --schema")
        x = predicates.encode_criterion(_load_schema(args.schema), _json_arg(args.x_json))
    if n is not None:
        obdd.check_word(x, n)
    return x


def cmd_compile(args) -> int:
    doc = _json_arg("@" + args.predicate)
    q, schema = predicates.compile_predicate(doc)
    _write_bytes(args.diagram, obdd.dumps(q))
    with open(args.schema, "w") as f:
        json.dump(schema.to_json(), f, indent=2)
        f.write("\n")
    print(schema.schema_id.hex())
    return EXIT_OK


def cmd_keygen(args) -> int:
    if args.notary:
        key = Ed25519PrivateKey.generate()
        raw = key.private_bytes_raw()
        if args.public_key:
            with open(args.public_key, "w") as f:
                f.write(certificate.public_key_bytes(key).hex() + "\n")
        print(raw.hex())
    else:
        print(secrets.token_bytes(commitment.SEED_SIZE).hex())
    return EXIT_OK


def cmd_commit(args) -> int:
    q = obdd.loads(_read_bytes(args.diagram))
    keys = commitment.derive_keys(_read_secret(args.seed_file, "WT_SEED_FILE", "seed"), q.n)
    tree = commitment.commit(q, keys)
    _write_bytes(args.out, commitment.dumps(tree))
    print(tree.root_hash.hex())
    return EXIT_OK


def cmd_notarize(args) -> int:
    root = _hex_arg(args.root, 32, "root")
    subject = _hex_arg(args.subject, 32, "subject")
    schema = _load_schema(args.schema)
    key = certificate.private_key_from_bytes(
        _read_secret(args.key_file, "WT_NOTARY_KEY_FILE", "key")
    )
    cert = certificate.issue(root, schema.schema_id, subject, args.valid_from, args.valid_to, key)
    _write_bytes(args.out, cert.encode())
    print(cert.signature.hex())
    return EXIT_OK


def cmd_open(args) -> int:
    q = obdd.loads(_read_bytes(args.diagram))
    tree = commitment.loads(_read_bytes(args.tree), q)
    keys = commitment.derive_keys(_read_secret(args.seed_file, "WT_SEED_FILE", "seed"), q.n)
    if not commitment.verify_full(tree.root_hash, q, keys):
        raise ValueError("seed does not reproduce the committed tree")
    x = _criterion(args, q.n)
    w = open_witness(tree, keys, x)
    _write_bytes(args.out, w.encode())
    print(w.payload.hex())
    return EXIT_OK


def cmd_encode(args) -> int:
    print(_criterion(args, None).hex())
    return EXIT_OK


def cmd_verify(args) -> int:
    root = _hex_arg(args.root, 32, "root")
    w = Witness.decode(_read_bytes(args.witness))
    x = _criterion(args, w.n)
    if args.cert:
        if not args.notary_pub:
            raise UsageError("--cert needs --notary-pub")
        cert = certificate.Certificate.decode(_read_bytes(args.cert))
        with open(args.notary_pub) as f:
            pub = certificate.public_key_from_bytes(_hex_arg(f.read(), 32, "notary public key"))
        now = int(time.time()) if args.now is None else args.now
        verdict = certificate.check(cert, pub, now)
        problem = None
        if verdict is not certificate.Verdict.VALID:
            problem = f"certificate {verdict.value}"
        elif cert.root_hash != root:
            problem = "certificate covers a different root"
        elif args.schema and cert.schema_id != _load_schema(args.schema).schema_id:
            problem = "certificate covers a different schema"
        if problem:
            print(problem, file=sys.stderr)
            print("REJECT")
            return EXIT_REJECT
    payload = verify(root, x, w)
    if payload is None:
        print("REJECT")
        return EXIT_REJECT
    print(f"ACCEPT {payload.hex()}")
    return EXIT_OK


def _add_criterion(p) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x-hex", help="criterion as raw hex (MSB-first, zero padded)")
    g.add_argument("--x-json", help="criterion as JSON field values, or @file")
    p.add_argument("--schema", help="schema JSON written by 'compile'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wibsontree",
        description="Commit to a predicate diagram, open single evaluations, verify them.",
        epilog="predicate types: " + ", ".join(predicates.TYPES),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compile", help="predicate JSON -> WTD1 diagram + schema JSON",
                       epilog="predicate types: " + ", ".join(predicates.TYPES))
    p.add_argument("predicate")
    p.add_argument("--diagram", required=True)
    p.add_argument("--schema", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("keygen", help="fresh commitment seed (or notary key) as hex")
    p.add_argument("--notary", action="store_true", help="generate an Ed25519 notary key")
    p.add_argument("--public-key", help="with --notary, write the public key hex here")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("commit", help="WTD1 + seed -> WTC-TREE1, root hex on stdout")
    p.add_argument("--diagram", required=True)
    p.add_argument("--seed-file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_commit)

    p = sub.add_parser("notarize", help="sign a root for a schema and subject")
    p.add_argument("--root", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--subject", required=True, help="32-byte subject pseudonym, hex")
    p.add_argument("--valid-from", type=int, required=True)
    p.add_argument("--valid-to", type=int, required=True)
    p.add_argument("--key-file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_notarize)

    p = sub.add_parser("open", help="WTC-TREE1 + seed + criterion -> WTW1 witness")
    p.add_argument("--diagram", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--seed-file")
    p.add_argument("--out", required=True)
    _add_criterion(p)
    p.set_defaults(func=cmd_open)

    p = sub.add_parser("encode", help="pack criterion fields into hex")
    _add_criterion(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("verify", help="check a witness against a root")
    p.add_argument("--root", required=True)
    p.add_argument("--witness", required=True)
    p.add_argument("--cert")
    p.add_argument("--notary-pub", help="file holding the notary public key hex")
    p.add_argument("--now", type=int)
    _add_criterion(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"wibsontree: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"wibsontree: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
