"""Canonical document model for emotion-cause corpora.

A corpus is an ordered list of documents; each document is a list of
pre-segmented clauses (1-based indices) plus gold emotion-cause pairs.
Two on-disk formats are supported:

* ``canonical-jsonl`` -- one JSON record per line with fields
  ``doc_id`` (string), ``clauses`` (array of strings), ``pairs``
  (array of ``[emotion_index, cause_index]``) and an optional
  ``emotion`` label.
* ``legacy-tabular`` -- NTCIR-style plain-text blocks::

      <doc_id> <n_clauses>
      (e1,c1), (e2,c2)
      1,<emotion_label or null>,<clause text>
      ...

  The document-level emotion label is the first non-null per-clause
  label. A fixture lives in ``tests/fixtures/legacy_sample.txt``.

Parsing is strict (malformed input raises :class:`CorpusFormatError`
with a line number); :func:`validate_corpus` re-checks invariants on
programmatically built values and reports violations as data.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

__all__ = [
    "Clause",
    "Pair",
    "Document",
    "Corpus",
    "Violation",
    "DataError",
    "CorpusFormatError",
    "normalize_text",
    "parse_corpus",
    "emit_corpus",
    "read_corpus",
    "write_corpus",
    "validate_corpus",
    "split_corpus",
]

SPLIT_TAGS = ("train", "test", "unsplit")

_WS_RUN = re.compile(r"\s+")


class DataError(Exception):
    """Invalid data supplied to the pipeline (exit code 1 in the CLI)."""


class CorpusFormatError(DataError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


def normalize_text(text: str) -> str:
    """Trim and collapse internal whitespace runs to single spaces.

    No case folding: emotion cues in English prose are case-sensitive.
    """
    return _WS_RUN.sub(" ", text.strip())


class Pair(NamedTuple):
    """An (emotion clause index, cause clause index) assertion, 1-based."""

    emotion: int
    cause: int


@dataclass(frozen=True, slots=True)
class Clause:
    index: int
    text: str


@dataclass(frozen=True, slots=True)
class Document:
    doc_id: str
    clauses: tuple[Clause, ...]
    gold_pairs: frozenset[Pair]
    emotion_label: str | None = None

    def text(self) -> str:
        """The whole document as one whitespace-joined string."""
        return " ".join(c.text for c in self.clauses)

    @property
    def clause_count(self) -> int:
        return len(self.clauses)

    def to_record(self) -> dict:
        record: dict = {
            "doc_id": self.doc_id,
            "clauses": [c.text for c in self.clauses],
            "pairs": [list(p) for p in sorted(self.gold_pairs)],
        }
        if self.emotion_label is not None:
            record["emotion"] = self.emotion_label
        return record

    def content_hash(self) -> str:
        """Stable hex digest of the document content (id, clauses, pairs, label)."""
        blob = json.dumps(self.to_record(), ensure_ascii=False, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, slots=True)
class Corpus:
    documents: tuple[Document, ...] = ()
    split_tag: str = "unsplit"

    def __post_init__(self):
        if self.split_tag not in SPLIT_TAGS:
            raise ValueError(f"split_tag must be one of {SPLIT_TAGS}, got {self.split_tag!r}")

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def get(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.doc_id == doc_id:
                return doc
        raise KeyError(doc_id)


@dataclass(frozen=True, slots=True)
class Violation:
    doc_id: str
    rule: str
    message: str


def _document_violations(doc: Document) -> list[Violation]:
    out = []
    if len(doc.clauses) < 2:
        out.append(Violation(doc.doc_id, "too-few-clauses", f"fewer than 2 clauses ({len(doc.clauses)})"))
    for pos, clause in enumerate(doc.clauses, start=1):
        if clause.index != pos:
            out.append(Violation(doc.doc_id, "bad-clause-index",
                                 f"clause at position {pos} has index {clause.index}"))
        if not clause.text:
            out.append(Violation(doc.doc_id, "empty-clause", f"clause {pos} is empty"))
        if "\n" in clause.text or "\r" in clause.text:
            out.append(Violation(doc.doc_id, "clause-linebreak", f"clause {pos} contains a line break"))
    n = len(doc.clauses)
    for pair in sorted(doc.gold_pairs):
        if not (1 <= pair.emotion <= n and 1 <= pair.cause <= n):
            out.append(Violation(doc.doc_id, "pair-out-of-range",
                                 f"pair ({pair.emotion},{pair.cause}) out of range for {n} clauses"))
    return out


def validate_corpus(corpus: Corpus) -> list[Violation]:
    """Check every corpus invariant; an empty list means the corpus is valid.

    Violations are data, not failures: each names the offending doc_id
    and the rule it breaks.
    """
    violations: list[Violation] = []
    seen: set[str] = set()
    for doc in corpus.documents:
        if doc.doc_id in seen:
            violations.append(Violation(doc.doc_id, "duplicate-doc-id", f"doc_id {doc.doc_id!r} repeats"))
        seen.add(doc.doc_id)
        violations.extend(_document_violations(doc))
    return violations


def _build_document(doc_id: str, clause_texts: list[str], pairs: list, emotion: str | None,
                    line_no: int) -> Document:
    if not doc_id:
        raise CorpusFormatError(line_no, "empty doc_id")
    texts = [normalize_text(t) for t in clause_texts]
    if len(texts) < 2:
        raise CorpusFormatError(line_no, f"doc {doc_id!r}: fewer than 2 clauses")
    if any(not t for t in texts):
        raise CorpusFormatError(line_no, f"doc {doc_id!r}: empty clause after normalization")
    clauses = tuple(Clause(i, t) for i, t in enumerate(texts, start=1))
    gold: set[Pair] = set()
    for raw_pair in pairs:
        if (not isinstance(raw_pair, (list, tuple)) or len(raw_pair) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in raw_pair)):
            raise CorpusFormatError(line_no, f"doc {doc_id!r}: malformed pair {raw_pair!r}")
        e, c = raw_pair
        if not (1 <= e <= len(clauses) and 1 <= c <= len(clauses)):
            raise CorpusFormatError(line_no, f"doc {doc_id!r}: pair index out of range ({e},{c})")
        gold.add(Pair(e, c))
    if emotion is not None and not isinstance(emotion, str):
        raise CorpusFormatError(line_no, f"doc {doc_id!r}: emotion label must be a string")
    return Document(doc_id=doc_id, clauses=clauses, gold_pairs=frozenset(gold), emotion_label=emotion)


def _parse_canonical(raw: str) -> list[Document]:
    documents = []
    seen: set[str] = set()
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusFormatError(line_no, f"invalid JSON: {e.msg}") from e
        if not isinstance(record, dict):
            raise CorpusFormatError(line_no, "record is not an object")
        missing = {"doc_id", "clauses", "pairs"} - record.keys()
        if missing:
            raise CorpusFormatError(line_no, f"missing fields: {sorted(missing)}")
        doc = _build_document(record["doc_id"], list(record["clauses"]), record["pairs"],
                              record.get("emotion"), line_no)
        if doc.doc_id in seen:
            raise CorpusFormatError(line_no, f"duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        documents.append(doc)
    return documents


_LEGACY_HEADER = re.compile(r"^(\S+)\s+(\d+)\s*$")
_LEGACY_PAIR = re.compile(r"\((\d+)\s*,\s*(\d+)\)")


def _parse_legacy(raw: str) -> list[Document]:
    lines = raw.splitlines()
    documents = []
    seen: set[str] = set()
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        header = _LEGACY_HEADER.match(lines[i].strip())
        if not header:
            raise CorpusFormatError(i + 1, f"expected '<doc_id> <n_clauses>' header, got {lines[i]!r}")
        doc_id, n = header.group(1), int(header.group(2))
        if i + 1 >= len(lines):
            raise CorpusFormatError(i + 2, f"doc {doc_id!r}: missing pair line")
        pair_line = lines[i + 1]
        pairs = [[int(e), int(c)] for e, c in _LEGACY_PAIR.findall(pair_line)]
        clause_texts: list[str] = []
        labels: list[str | None] = []
        for k in range(n):
            row_no = i + 2 + k
            if row_no >= len(lines):
                raise CorpusFormatError(row_no + 1, f"doc {doc_id!r}: expected {n} clause rows")
            parts = lines[row_no].split(",", 2)
            if len(parts) != 3:
                raise CorpusFormatError(row_no + 1, f"doc {doc_id!r}: expected 'index,label,text' row")
            idx_text, label, text = parts
            try:
                idx = int(idx_text)
            except ValueError:
                raise CorpusFormatError(row_no + 1, f"doc {doc_id!r}: bad clause index {idx_text!r}") from None
            if idx != k + 1:
                raise CorpusFormatError(row_no + 1, f"doc {doc_id!r}: clause index {idx} out of order")
            labels.append(None if label.strip().lower() == "null" else label.strip())
            clause_texts.append(text)
        emotion = next((lab for lab in labels if lab), None)
        doc = _build_document(doc_id, clause_texts, pairs, emotion, i + 1)
        if doc.doc_id in seen:
            raise CorpusFormatError(i + 1, f"duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        documents.append(doc)
        i += 2 + n
    return documents


def parse_corpus(raw: str, format: str = "canonical-jsonl", split_tag: str = "unsplit") -> Corpus:
    """Parse corpus text into the canonical model, preserving file order.

    Raises :class:`CorpusFormatError` (with line number and reason) on the
    first malformed record, duplicated doc_id, or out-of-range pair.
    Empty input yields an empty corpus.
    """
    if format == "canonical-jsonl":
        documents = _parse_canonical(raw)
    elif format == "legacy-tabular":
        documents = _parse_legacy(raw)
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    return Corpus(documents=tuple(documents), split_tag=split_tag)


def emit_corpus(corpus: Corpus) -> str:
    """Serialize to the canonical line format; inverse of :func:`parse_corpus`."""
    lines = [json.dumps(doc.to_record(), ensure_ascii=False, separators=(",", ":"))
             for doc in corpus.documents]
    return "".join(line + "\n" for line in lines)


def read_corpus(path: str | Path, format: str = "canonical-jsonl", split_tag: str = "unsplit") -> Corpus:
    return parse_corpus(Path(path).read_text(encoding="utf-8"), format=format, split_tag=split_tag)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(emit_corpus(corpus), encoding="utf-8")


def split_corpus(corpus: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministically partition an unsplit corpus into train and test.

    The test set holds ``round(n * test_fraction)`` documents drawn by a
    seeded sampler; both halves keep the original document order, so the
    same (corpus, fraction, seed) always reproduces the same split.
    """
    if corpus.split_tag != "unsplit":
        raise ValueError(f"corpus is already split (tag {corpus.split_tag!r})")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0,1), got {test_fraction}")
    n = len(corpus.documents)
    n_test = int(round(n * test_fraction))
    rng = random.Random(seed)
    test_idx = set(rng.sample(range(n), n_test))
    train_docs = tuple(d for i, d in enumerate(corpus.documents) if i not in test_idx)
    test_docs = tuple(d for i, d in enumerate(corpus.documents) if i in test_idx)
    return (Corpus(documents=train_docs, split_tag="train"),
            Corpus(documents=test_docs, split_tag="test"))
