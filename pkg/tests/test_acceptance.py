"""Exit criteria.  Each test carries an ``acceptance`` marker; the terminal
summary prints one PASS/FAIL line per criterion."""

import json
import os
import random
import time

import pytest
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from wibsontree import cli
from wibsontree.certificate import Certificate, CertificateFormatError, Verdict, check, issue
from wibsontree.commitment import CountingSha256, commit, derive_keys
from wibsontree.compilers import (
    Dfa, cell_slot_width, compile_any_slot_in_set, compile_at_least, compile_dfa, compile_point_in_cells,
    compile_range_membership, morton, wildcard_set_to_dfa,
)
from wibsontree.obdd import DiagramError, evaluate, expand, input_word, reduce, truth_table
from wibsontree.witness import Witness, WitnessFormatError, encoded_size, open_witness, verify

from oracles import as_payload, brute_diagram, fields, point_in_cells_reference, random_layered, random_payloads

SEED = 0x5EED


@pytest.fixture(scope="module")
def cases():
    """200 random layered functions with n <= 12, each paired with fresh keys."""
    rng = random.Random(SEED)
    out = []
    for j in range(200):
        n = 12 if j % 10 == 0 else rng.randint(0, 12)
        q = random_layered(rng, n, payloads=random_payloads(rng, rng.randint(2, 4)))
        keys = derive_keys(rng.randbytes(32), n)
        out.append((q, keys))
    return out


@pytest.mark.acceptance("1. round-trip completeness: verify(open(X)) == evaluate(X), 200 functions, all inputs")
def test_round_trip_completeness(cases):
    start = time.perf_counter()
    checked = 0
    for q, keys in cases:
        tree = commit(q, keys)
        for k in range(1 << q.n):
            x = input_word(k, q.n)
            assert verify(tree.root_hash, x, open_witness(tree, keys, x)) == evaluate(q, x) == brute_diagram(q, k)
            checked += 1
    assert time.perf_counter() - start < 60
    assert checked > 200


@pytest.mark.acceptance("2. compression invariance: full-tree vs reduced roots and witnesses byte-equal")
def test_compression_invariance(cases):
    for q, keys in cases:
        full, reduced = expand(q), reduce(q)
        t_full, t_red = commit(full, keys), commit(reduced, keys)
        assert t_full.root_hash == t_red.root_hash
        assert full.node_count() >= reduced.node_count()
        for k in range(1 << q.n):
            x = input_word(k, q.n)
            assert open_witness(t_full, keys, x).encode() == open_witness(t_red, keys, x).encode()


@pytest.mark.acceptance("3. witness size: 8 + 64n + |payload| bytes, independent of node count")
def test_witness_size():
    rng = random.Random(SEED + 3)
    for n in (0, 1, 8, 64, 256):
        payloads = random_payloads(rng, 4)
        q = random_layered(rng, n, max_width=6, payloads=payloads)
        variants = [q, reduce(q)] + ([expand(q)] if n <= 8 else [])
        keys = derive_keys(rng.randbytes(32), n)
        trees = [commit(v, keys) for v in variants]
        if n >= 8:
            assert len({v.node_count() for v in variants}) > 1
        for _ in range(50):
            x = input_word(rng.getrandbits(n) if n else 0, n)
            sizes = set()
            for t in trees:
                w = open_witness(t, keys, x)
                sizes.add(len(w.encode()))
                assert len(w.encode()) == encoded_size(n, len(w.payload)) == 8 + 64 * n + len(w.payload)
            assert len(sizes) == 1


@pytest.mark.acceptance("4. hash counts: verify = 2n+1, commit = leaves + 3 * internal nodes (exact)")
def test_hash_counts(cases):
    rng = random.Random(SEED + 4)
    extra = [(q, derive_keys(rng.randbytes(32), q.n)) for q in (random_layered(rng, 64), random_layered(rng, 256))]
    for q, keys in cases[:60] + extra:
        for variant in (q, reduce(q)):
            counter = CountingSha256()
            tree = commit(variant, keys, counter)
            assert counter.calls == len(variant.leaves) + 3 * variant.node_count()
            for _ in range(5):
                x = input_word(rng.getrandbits(q.n) if q.n else 0, q.n)
                w = open_witness(tree, keys, x)
                counter = CountingSha256()
                assert verify(tree.root_hash, x, w, counter) is not None
                assert counter.calls == 2 * q.n + 1


def _accepts(root, x, wbytes, n):
    try:
        w = Witness.decode(wbytes)
        if w.n != n:
            return False
        return verify(root, x, w) is not None
    except (WitnessFormatError, DiagramError, ValueError):
        return False


@pytest.mark.acceptance("5. tamper soundness: 10^5 single-bit mutations of (witness, X, root), 0 false accepts")
def test_tamper_soundness(cases):
    rng = random.Random(SEED + 5)
    pool = []
    for q, keys in [c for c in cases if c[0].n >= 1][:40]:
        tree = commit(q, keys)
        for _ in range(10):
            x = input_word(rng.getrandbits(q.n), q.n)
            pool.append((q.n, tree.root_hash, x, open_witness(tree, keys, x).encode()))
    false_accepts = 0
    for _ in range(100_000):
        n, root, x, wb = rng.choice(pool)
        blob = bytearray(wb + x + root)
        pos = rng.randrange(8 * len(blob))
        blob[pos >> 3] ^= 0x80 >> (pos & 7)
        w2 = bytes(blob[: len(wb)])
        x2 = bytes(blob[len(wb): len(wb) + len(x)])
        r2 = bytes(blob[len(wb) + len(x):])
        if _accepts(r2, x2, w2, n):
            false_accepts += 1
    assert false_accepts == 0


def _exhaustive(q, reference):
    assert q.n <= 16
    table = truth_table(q)
    for k in range(1 << q.n):
        assert table[k] == as_payload(reference(k)), k


def _sampled(q, reference, rng, count=100_000, extra=()):
    for _ in range(count):
        k = rng.getrandbits(q.n)
        assert evaluate(q, input_word(k, q.n)) == as_payload(reference(k))
    for k in extra:
        assert evaluate(q, input_word(k, q.n)) == as_payload(reference(k))


def _random_dfa(rng, states):
    return Dfa(tuple((rng.randrange(states), rng.randrange(states)) for _ in range(states)),
               0, tuple(as_payload(rng.random() < 0.5) for _ in range(states)))


def _pack_slots(values, width):
    acc = 0
    for v in values:
        acc = (acc << width) | v
    return acc


@pytest.mark.acceptance("6. compilers agree with brute-force oracles (exhaustive <= 16 bits, 10^5 samples at production widths)")
def test_compiler_correctness():
    rng = random.Random(SEED + 6)

    # range membership
    for attr in (0, 25, 200, 255):
        _exhaustive(compile_range_membership(attr, 8), lambda k, a=attr: (lambda mn, mx: mn <= a <= mx)(*fields(k, 16, (8, 8))))
    attr = 40_000
    _sampled(compile_range_membership(attr, 16),
             lambda k: (lambda mn, mx: mn <= attr <= mx)(*fields(k, 32, (16, 16))), rng)

    # at least
    for attr in (0, 23, 9999, 65535):
        _exhaustive(compile_at_least(attr, 16), lambda k, a=attr: a >= k)
    balance = 23_000_000
    _sampled(compile_at_least(balance, 32), lambda k: balance >= k, rng,
             extra=[balance, balance + 1, balance - 1, 0, 2**32 - 1])

    # any slot in set
    members = {3, 9, 200, 255}
    _exhaustive(compile_any_slot_in_set(members, 2, 8), lambda k: any(v in members for v in fields(k, 16, (8, 8))))
    k_slots, b = 8, 16
    members = {rng.randrange(1, 1 << b) for _ in range(20)}
    ref = lambda k: any(v in members for v in fields(k, k_slots * b, (b,) * k_slots))  # noqa: E731
    structured = [
        _pack_slots([rng.choice([0, rng.choice(sorted(members)), rng.randrange(1 << b)]) for _ in range(k_slots)], b)
        for _ in range(5000)
    ]
    _sampled(compile_any_slot_in_set(members, k_slots, b), ref, rng, extra=structured)

    # point in cells
    w = 3
    for lat, lon in ((0, 0), (5, 2), (7, 7)):
        _exhaustive(compile_point_in_cells(lat, lon, 1, w),
                    lambda k, la=lat, lo=lon: point_in_cells_reference(la, lo, w, [(k >> 6, k & 63)]))
    w, k_slots = 16, 8
    lat, lon = 41_234, 1_777
    size = cell_slot_width(w)
    code = morton(lat, lon, w)

    def cells_ref(k):
        slots = [(v >> (2 * w), v & ((1 << 2 * w) - 1)) for v in fields(k, k_slots * size, (size,) * k_slots)]
        return point_in_cells_reference(lat, lon, w, slots)

    def near_slot():
        d = rng.randint(0, 2 * w)
        prefix = (code >> (2 * w - d)) << (2 * w - d) if d else 0
        if rng.random() < 0.5 and d:
            prefix ^= 1 << (2 * w - rng.randint(1, d))
        return (d << (2 * w)) | prefix

    structured = [_pack_slots([near_slot() for _ in range(k_slots)], size) for _ in range(5000)]
    _sampled(compile_point_in_cells(lat, lon, k_slots, w), cells_ref, rng, extra=structured)

    # DFA
    for _ in range(5):
        d = _random_dfa(rng, 6)
        _exhaustive(compile_dfa(d, 16), lambda k, d=d: d.run(fields(k, 16, (1,) * 16)) == b"\x01")
    d = _random_dfa(rng, 12)
    _sampled(compile_dfa(d, 64), lambda k: d.run(fields(k, 64, (1,) * 64)) == b"\x01", rng)

    # wildcard sets
    def matcher(pats, n):
        return lambda k: any(all(c == "*" or int(c) == bit for c, bit in zip(p, fields(k, n, (1,) * n)))
                             for p in pats)

    pats = ["".join(rng.choice("01**") for _ in range(16)) for _ in range(6)]
    _exhaustive(compile_dfa(wildcard_set_to_dfa(pats, 16), 16), matcher(pats, 16))
    pats = ["".join(rng.choice("01***") for _ in range(32)) for _ in range(6)]
    word = lambda p: int("".join(c if c != "*" else rng.choice("01") for c in p), 2)  # noqa: E731
    _sampled(compile_dfa(wildcard_set_to_dfa(pats, 32), 32), matcher(pats, 32), rng,
             extra=[word(rng.choice(pats)) for _ in range(2000)])


@pytest.mark.acceptance("7. range compiler: <= 4 internal nodes per level for every attr at w=8 and w=16")
def test_range_size_bound():
    for w in (8, 16):
        worst = 0
        for attr in range(1 << w):
            worst = max(worst, max(compile_range_membership(attr, w).width()))
        assert worst <= 4


def _scenario(tmp_path, capsys, name, predicate, criterion):
    d = tmp_path / name
    d.mkdir()
    p = lambda f: str(d / f)  # noqa: E731
    with open(p("pred.json"), "w") as f:
        json.dump(predicate, f)
    with open(p("seed"), "w") as f:
        f.write(os.urandom(32).hex())
    key = Ed25519PrivateKey.generate()
    with open(p("nkey"), "w") as f:
        f.write(key.private_bytes_raw().hex())
    with open(p("npub"), "w") as f:
        f.write(key.public_key().public_bytes_raw().hex())

    start = time.perf_counter()
    steps = [
        ["compile", p("pred.json"), "--diagram", p("d.wtd"), "--schema", p("s.json")],
        ["commit", "--diagram", p("d.wtd"), "--seed-file", p("seed"), "--out", p("t.wtc")],
    ]
    for argv in steps:
        assert cli.main(argv) == 0
    root = capsys.readouterr().out.splitlines()[-1]
    assert cli.main(["notarize", "--root", root, "--schema", p("s.json"), "--subject", "00" * 32,
                     "--valid-from", "0", "--valid-to", str(2**40), "--key-file", p("nkey"),
                     "--out", p("c.wtc1")]) == 0
    crit = json.dumps(criterion)
    assert cli.main(["open", "--diagram", p("d.wtd"), "--tree", p("t.wtc"), "--seed-file", p("seed"),
                     "--schema", p("s.json"), "--x-json", crit, "--out", p("w.wtw")]) == 0
    code = cli.main(["verify", "--root", root, "--witness", p("w.wtw"), "--schema", p("s.json"),
                     "--x-json", crit, "--cert", p("c.wtc1"), "--notary-pub", p("npub")])
    return code, time.perf_counter() - start


@pytest.mark.acceptance("8. paper scenarios end-to-end via CLI, each under 1 s")
def test_cli_scenarios(tmp_path, capsys):
    scenarios = [
        ("age_in", {"type": "ageInRange", "age": 25, "width": 8}, {"minAge": 20, "maxAge": 30}, "ACCEPT 01"),
        ("balance", {"type": "bankBalanceAtLeast", "balance": 23, "width": 16}, {"minBalance": 10}, "ACCEPT 01"),
        ("age_out", {"type": "ageInRange", "age": 25, "width": 8}, {"minAge": 26, "maxAge": 30}, "ACCEPT 00"),
    ]
    for name, pred, crit, expected in scenarios:
        capsys.readouterr()
        code, elapsed = _scenario(tmp_path, capsys, name, pred, crit)
        out = capsys.readouterr().out.splitlines()
        assert code == 0
        assert out[-1] == expected
        assert elapsed < 1.0, f"{name} took {elapsed:.2f}s"


@pytest.mark.acceptance("9. certificates: 10^3 issue/check round trips and single-byte mutations, 0 failures")
def test_certificate_suite():
    rng = random.Random(SEED + 9)
    key = Ed25519PrivateKey.generate()
    pub = key.public_key()
    failures = 0
    for _ in range(1000):
        start = rng.randrange(2**40)
        end = start + rng.randrange(2**30)
        cert = issue(rng.randbytes(32), rng.randbytes(32), rng.randbytes(32), start, end, key)
        now = rng.randint(start, end)
        if check(Certificate.decode(cert.encode()), pub, now) is not Verdict.VALID:
            failures += 1
        data = bytearray(cert.encode())
        data[rng.randrange(len(data))] ^= rng.randrange(1, 256)
        try:
            verdict = check(Certificate.decode(bytes(data)), pub, now)
        except CertificateFormatError:
            continue
        if verdict is Verdict.VALID:
            failures += 1
    # every byte position of one certificate
    cert = issue(rng.randbytes(32), rng.randbytes(32), rng.randbytes(32), 0, 2**40, key)
    data = cert.encode()
    for pos in range(len(data)):
        mutated = bytearray(data)
        mutated[pos] ^= 0xFF
        try:
            if check(Certificate.decode(bytes(mutated)), pub, 2**20) is Verdict.VALID:
                failures += 1
        except CertificateFormatError:
            pass
    assert failures == 0
