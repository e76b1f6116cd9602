"""Shared helpers for the test suite."""

import json
from pathlib import Path

from ccfg import parse_grammar_document

GOLDEN_DIR = Path(__file__).parent / "golden"
ORACLE_DIR = Path(__file__).parent / "oracles"

GOLDEN_NAMES = [
    "blocks_pair_lists",
    "counted_list",
    "digit_rows",
    "two_scalars",
    "stats_and_queries",
    "letter_grid",
    "signed_pair",
    "op_sequence",
]

INVALID_NAMES = [
    "invalid_null",
    "invalid_unbracketed",
    "invalid_missing_ref",
    "invalid_overflow",
    "invalid_nonterminal",
]


def make_grammar(productions, constraints=()):
    doc = {"grammar": {"productions": list(productions),
                       "constraints": list(constraints)}}
    return parse_grammar_document(json.dumps(doc).encode())


def golden_bytes(name):
    return (GOLDEN_DIR / f"{name}.json").read_bytes()


def golden_grammar(name):
    return parse_grammar_document(golden_bytes(name))
