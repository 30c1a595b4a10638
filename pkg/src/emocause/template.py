"""Instruction templates and the pair grammar.

An instruction is built from four elements, in order: the task
description, the document context (a ``Document <id>:`` header plus
numbered clauses), an emotional-knowledge preamble matching the knowledge
kind, and the serialized knowledge itself (seven ``label: score`` lines
at 4 decimal places, or a single POSITIVE/NEGATIVE token). Rendering is
byte-deterministic.

Gold responses use the canonical pair grammar ``(e1,c1); (e2,c2)`` with
pairs sorted ascending. :func:`parse_pairs` reads the grammar back
tolerantly: it extracts every ``(int,int)`` group from arbitrary prose,
accepting full-width parentheses and commas, and never fails -- an
unparseable string yields the empty set with a no-match flag.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import DataError, Document, Pair
from .knowledge import AnnotatedDocument

__all__ = [
    "PairSet",
    "TemplateConfig",
    "InstructionRecord",
    "PairParse",
    "load_template_config",
    "default_template_config",
    "render_instruction",
    "render_bare_instruction",
    "render_response",
    "parse_pairs",
    "parse_pairs_detailed",
    "record_to_json_line",
    "record_from_json_line",
    "write_instruction_records",
    "read_instruction_records",
]

# A pair set is just a frozenset of pairs; gold sets are nonempty, predictions may be empty.
PairSet = frozenset[Pair]

_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True, slots=True)
class TemplateConfig:
    task_description: str
    knowledge_preamble_distribution: str
    knowledge_preamble_polarity: str
    response_grammar_version: str = "pairs-v1"

    def __post_init__(self):
        for name in ("task_description", "knowledge_preamble_distribution",
                     "knowledge_preamble_polarity", "response_grammar_version"):
            if not getattr(self, name).strip():
                raise ValueError(f"{name} must be nonempty")
        if self.response_grammar_version != "pairs-v1":
            raise ValueError(f"unknown response grammar {self.response_grammar_version!r}")

    @property
    def version(self) -> str:
        """Content hash of the config; edits to any text bump the version."""
        blob = json.dumps({
            "task_description": self.task_description,
            "knowledge_preamble_distribution": self.knowledge_preamble_distribution,
            "knowledge_preamble_polarity": self.knowledge_preamble_polarity,
            "response_grammar_version": self.response_grammar_version,
        }, ensure_ascii=False, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def load_template_config(path: str | Path) -> TemplateConfig:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return TemplateConfig(
            task_description=record["task_description"],
            knowledge_preamble_distribution=record["knowledge_preamble_distribution"],
            knowledge_preamble_polarity=record["knowledge_preamble_polarity"],
            response_grammar_version=record.get("response_grammar_version", "pairs-v1"),
        )
    except KeyError as e:
        raise DataError(f"template config {path}: missing field {e}") from e


def default_template_config() -> TemplateConfig:
    return load_template_config(_DATA_DIR / "template_default.json")


@dataclass(frozen=True, slots=True)
class InstructionRecord:
    record_id: str
    source: str  # "ecpe" | "causal"
    instruction: str
    response: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.source not in ("ecpe", "causal"):
            raise ValueError(f"source must be 'ecpe' or 'causal', got {self.source!r}")
        if not self.instruction or not self.response:
            raise ValueError("instruction and response must be nonempty")
        if self.source == "ecpe" and "doc_id" not in self.meta:
            raise ValueError("ecpe records must carry doc_id in meta")


def _document_context(doc: Document) -> str:
    lines = [f"Document {doc.doc_id}:"]
    lines.extend(f"{clause.index}. {clause.text}" for clause in doc.clauses)
    return "\n".join(lines)


def _knowledge_block(annotated: AnnotatedDocument, config: TemplateConfig) -> str:
    knowledge = annotated.knowledge
    if knowledge.kind == "distribution":
        assert knowledge.distribution is not None
        lines = [f"{label}: {score:.4f}" for label, score in knowledge.distribution.entries]
        return config.knowledge_preamble_distribution + "\n" + "\n".join(lines)
    assert knowledge.polarity is not None
    return config.knowledge_preamble_polarity + "\n" + knowledge.polarity.label


def render_instruction(annotated: AnnotatedDocument, config: TemplateConfig,
                       split_tag: str = "unsplit") -> InstructionRecord:
    """Render the four-element instruction for a knowledge-annotated document."""
    doc = annotated.document
    instruction = "\n\n".join([
        config.task_description,
        _document_context(doc),
        _knowledge_block(annotated, config),
    ])
    return InstructionRecord(
        record_id=f"ecpe:{doc.doc_id}",
        source="ecpe",
        instruction=instruction,
        response=render_response(doc.gold_pairs),
        meta={"doc_id": doc.doc_id, "knowledge_kind": annotated.knowledge.kind,
              "template_version": config.version, "split": split_tag},
    )


def render_bare_instruction(doc: Document, config: TemplateConfig,
                            split_tag: str = "unsplit") -> InstructionRecord:
    """Render only the task description and document context.

    This is the no-emotional-knowledge ablation arm: elements one and two
    of the template, nothing else.
    """
    instruction = "\n\n".join([config.task_description, _document_context(doc)])
    return InstructionRecord(
        record_id=f"ecpe:{doc.doc_id}",
        source="ecpe",
        instruction=instruction,
        response=render_response(doc.gold_pairs),
        meta={"doc_id": doc.doc_id, "knowledge_kind": "omitted",
              "template_version": config.version, "split": split_tag},
    )


def render_response(gold: Iterable[Pair]) -> str:
    """Canonical response: pairs sorted by (emotion, cause), semicolon-joined."""
    pairs = sorted(set(gold))
    if not pairs:
        raise ValueError("gold pair set must be nonempty")
    return "; ".join(f"({p.emotion},{p.cause})" for p in pairs)


_PAIR_GROUP = re.compile(r"[(（]\s*(\d+)\s*[,，]\s*(\d+)\s*[)）]")


@dataclass(frozen=True, slots=True)
class PairParse:
    pairs: PairSet
    no_match: bool
    groups_found: int

    @property
    def duplicates(self) -> int:
        return self.groups_found - len(self.pairs)


def parse_pairs_detailed(text: str) -> PairParse:
    """Extract all (int,int) groups from model output; total, never raises."""
    groups = _PAIR_GROUP.findall(text)
    pairs = frozenset(Pair(int(e), int(c)) for e, c in groups)
    return PairParse(pairs=pairs, no_match=not groups, groups_found=len(groups))


def parse_pairs(text: str) -> PairSet:
    return parse_pairs_detailed(text).pairs


# --- record serialization ----------------------------------------------------

def record_to_json_line(record: InstructionRecord) -> str:
    return json.dumps({
        "record_id": record.record_id,
        "source": record.source,
        "instruction": record.instruction,
        "response": record.response,
        "meta": record.meta,
    }, ensure_ascii=False, separators=(",", ":"))


def record_from_json_line(line: str) -> InstructionRecord:
    obj = json.loads(line)
    return InstructionRecord(record_id=obj["record_id"], source=obj["source"],
                             instruction=obj["instruction"], response=obj["response"],
                             meta=dict(obj.get("meta", {})))


def write_instruction_records(records: Iterable[InstructionRecord], path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    text = "".join(record_to_json_line(r) + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")


def read_instruction_records(path: str | Path) -> list[InstructionRecord]:
    records = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(record_from_json_line(line))
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            raise DataError(f"{path}: line {line_no}: {e}") from e
    return records
