"""Bundled desk-scale fixtures: a 20-document toy corpus, a 200-record
causal pool, the default template config, and the wire-contract fixtures."""

from __future__ import annotations

import json
from pathlib import Path

_DIR = Path(__file__).parent

TOY_CORPUS_PATH = _DIR / "toy_corpus.jsonl"
TOY_CAUSAL_PATH = _DIR / "toy_causal.jsonl"
TEMPLATE_DEFAULT_PATH = _DIR / "template_default.json"
WIRE_FIXTURES_PATH = _DIR / "wire_fixtures.json"


def load_toy_corpus(split_tag: str = "unsplit"):
    from ..corpus import read_corpus

    return read_corpus(TOY_CORPUS_PATH, split_tag=split_tag)


def load_toy_causal():
    from ..blend import read_causal_pool

    return read_causal_pool(TOY_CAUSAL_PATH).records


def toy_gold_responses() -> dict[str, str]:
    """doc_id -> canonical gold response for the bundled toy corpus."""
    from ..template import render_response

    return {doc.doc_id: render_response(doc.gold_pairs) for doc in load_toy_corpus()}


def load_wire_fixtures() -> list[dict]:
    return json.loads(WIRE_FIXTURES_PATH.read_text(encoding="utf-8"))["cases"]
