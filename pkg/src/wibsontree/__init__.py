"""Hash commitments to boolean predicates encoded as ordered binary decision diagrams.

A seller's predicate over a buyer's criterion is compiled into a
quasi-reduced diagram, committed to with per-level blinded hashes, and
opened one evaluation path at a time.
"""

from .commitment import CommitmentTree, SeedKeys, commit, derive_keys, hash_internal, verify_full
from .obdd import Qrobdd, apply, build_layered, evaluate, input_word, negate, reduce, truth_table
from .witness import Witness, open_witness, verify

__all__ = [
    "CommitmentTree",
    "Qrobdd",
    "SeedKeys",
    "Witness",
    "apply",
    "build_layered",
    "commit",
    "derive_keys",
    "evaluate",
    "hash_internal",
    "input_word",
    "negate",
    "open_witness",
    "reduce",
    "truth_table",
    "verify",
    "verify_full",
]
