"""Emotional-knowledge annotation for documents.

For each document the pipeline asks the commonsense generator for the
reader's likely reaction. A usable reaction is scored against the seven
emotion labels by cosine similarity and ranked into a distribution; a
"none" reaction falls back to a coarse POSITIVE/NEGATIVE polarity verdict.
Exactly one of the two knowledge kinds is produced per document.

Results are cached keyed by (doc_id, content hash), so re-annotating an
unchanged corpus performs no service calls. Cache records are versioned
line-delimited JSON: ``{"v", "doc_id", "content_hash", "kind", "payload",
"commonsense"}``.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clients import ClientError, EmbeddingVector, PolarityVerdict
from .corpus import Corpus, Document

__all__ = [
    "EMOTION_LABELS",
    "KnowledgeError",
    "CommonsenseResult",
    "LabelDistribution",
    "EmotionalKnowledge",
    "AnnotatedDocument",
    "NoneRateStats",
    "AnnotationResult",
    "cosine",
    "is_none_reaction",
    "fetch_commonsense",
    "score_labels",
    "build_knowledge",
    "annotate_corpus",
    "knowledge_from_payload",
    "knowledge_payload",
    "write_annotations",
    "read_annotations",
]

# Canonical label order; distribution ties are broken by position here.
EMOTION_LABELS = ("fear", "disgust", "sadness", "happiness", "surprise", "anger", "neutral")

_LABEL_INDEX = {label: i for i, label in enumerate(EMOTION_LABELS)}


class KnowledgeError(Exception):
    """Annotation failure for a specific document."""

    def __init__(self, doc_id: str, message: str):
        super().__init__(f"doc {doc_id!r}: {message}")
        self.doc_id = doc_id


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Cosine similarity dot(u,v) / (|u| |v|), in [-1, 1]."""
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    nu = float(np.linalg.norm(u.values))
    nv = float(np.linalg.norm(v.values))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return float(np.dot(u.values, v.values) / (nu * nv))


def is_none_reaction(reaction: str) -> bool:
    """A reaction counts as "none" iff it equals "none" after trim + case fold."""
    return reaction.strip().casefold() == "none"


@dataclass(frozen=True, slots=True)
class CommonsenseResult:
    doc_id: str
    reaction: str
    is_none: bool

    def __post_init__(self):
        if self.is_none != is_none_reaction(self.reaction):
            raise ValueError("is_none flag disagrees with the normalized reaction")

    @classmethod
    def from_reaction(cls, doc_id: str, reaction: str) -> "CommonsenseResult":
        trimmed = reaction.strip()
        return cls(doc_id=doc_id, reaction=trimmed, is_none=is_none_reaction(trimmed))


@dataclass(frozen=True, slots=True)
class LabelDistribution:
    """All seven labels paired with scores, sorted high to low.

    Equal scores keep canonical label order, so the distribution is a
    deterministic function of the score mapping.
    """

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        labels = [label for label, _ in self.entries]
        if sorted(labels) != sorted(EMOTION_LABELS):
            raise ValueError("entries must be a permutation of the 7 emotion labels")
        for (la, sa), (lb, sb) in zip(self.entries, self.entries[1:]):
            if sa < sb:
                raise ValueError("scores must be non-increasing")
            if sa == sb and _LABEL_INDEX[la] > _LABEL_INDEX[lb]:
                raise ValueError("tied scores must keep canonical label order")
        for _, score in self.entries:
            if not -1.0 - 1e-9 <= score <= 1.0 + 1e-9:
                raise ValueError(f"score {score} outside [-1, 1]")

    @classmethod
    def from_scores(cls, scores: dict[str, float]) -> "LabelDistribution":
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], _LABEL_INDEX[kv[0]]))
        return cls(entries=tuple(ordered))

    def top_label(self) -> str:
        return self.entries[0][0]


@dataclass(frozen=True, slots=True)
class EmotionalKnowledge:
    doc_id: str
    kind: str  # "distribution" | "polarity"
    distribution: LabelDistribution | None = None
    polarity: PolarityVerdict | None = None

    def __post_init__(self):
        if self.kind == "distribution":
            if self.distribution is None or self.polarity is not None:
                raise ValueError("kind=distribution requires a distribution and no polarity")
        elif self.kind == "polarity":
            if self.polarity is None or self.distribution is not None:
                raise ValueError("kind=polarity requires a polarity and no distribution")
        else:
            raise ValueError(f"kind must be 'distribution' or 'polarity', got {self.kind!r}")


@dataclass(frozen=True, slots=True)
class AnnotatedDocument:
    document: Document
    knowledge: EmotionalKnowledge
    commonsense: CommonsenseResult

    def __post_init__(self):
        if self.knowledge.doc_id != self.document.doc_id:
            raise ValueError("knowledge doc_id does not match document")


@dataclass(frozen=True, slots=True)
class NoneRateStats:
    total: int
    none_count: int

    @property
    def none_rate(self) -> float | None:
        """Fraction of documents on the polarity branch; None for an empty corpus."""
        if self.total == 0:
            return None
        return self.none_count / self.total

    def to_dict(self) -> dict:
        return {"total": self.total, "none_count": self.none_count, "none_rate": self.none_rate}


@dataclass(slots=True)
class AnnotationResult:
    annotated: list[AnnotatedDocument]
    stats: NoneRateStats
    failures: list[tuple[str, str, str]]  # (doc_id, kind, message); kind is transport|data
    cache_hits: int = 0

    @property
    def transport_failures(self) -> int:
        return sum(1 for _, kind, _ in self.failures if kind == "transport")


def fetch_commonsense(doc: Document, generator) -> CommonsenseResult:
    """Ask the generator for the reaction to the whole document text."""
    try:
        reaction = generator.generate_reaction(doc.text())
    except ClientError as e:
        raise KnowledgeError(doc.doc_id, str(e)) from e
    return CommonsenseResult.from_reaction(doc.doc_id, reaction)


def score_labels(reaction: str, embedder) -> LabelDistribution:
    """Rank the seven emotion labels by cosine similarity to the reaction.

    The reaction and all labels are embedded in one batch; each label is
    paired with its cosine against the reaction vector and the pairs are
    sorted high to low (canonical label order on ties).
    """
    if not reaction.strip():
        raise ValueError("reaction must be nonempty")
    if is_none_reaction(reaction):
        raise ValueError("cannot score the 'none' sentinel against labels")
    vectors = embedder.embed([reaction, *EMOTION_LABELS])
    reaction_vec = vectors[0]
    scores = {label: cosine(reaction_vec, vec)
              for label, vec in zip(EMOTION_LABELS, vectors[1:])}
    return LabelDistribution.from_scores(scores)


def _knowledge_from_commonsense(doc: Document, commonsense: CommonsenseResult,
                                embedder, polarity) -> EmotionalKnowledge:
    try:
        if commonsense.is_none:
            verdict = polarity.classify_polarity(doc.text())
            return EmotionalKnowledge(doc_id=doc.doc_id, kind="polarity", polarity=verdict)
        distribution = score_labels(commonsense.reaction, embedder)
        return EmotionalKnowledge(doc_id=doc.doc_id, kind="distribution", distribution=distribution)
    except ClientError as e:
        raise KnowledgeError(doc.doc_id, str(e)) from e


def build_knowledge(doc: Document, generator, embedder, polarity) -> EmotionalKnowledge:
    """Produce the document's emotional knowledge, one kind exactly.

    A usable reaction takes the label-distribution branch; a "none"
    reaction takes the polarity branch.
    """
    commonsense = fetch_commonsense(doc, generator)
    return _knowledge_from_commonsense(doc, commonsense, embedder, polarity)


# --- cache -----------------------------------------------------------------

CACHE_VERSION = 1


def knowledge_payload(knowledge: EmotionalKnowledge) -> dict:
    if knowledge.kind == "distribution":
        assert knowledge.distribution is not None
        return {"kind": "distribution",
                "entries": [[label, score] for label, score in knowledge.distribution.entries]}
    assert knowledge.polarity is not None
    return {"kind": "polarity",
            "label": knowledge.polarity.label,
            "confidence": knowledge.polarity.confidence}


def knowledge_from_payload(doc_id: str, payload: dict) -> EmotionalKnowledge:
    if payload["kind"] == "distribution":
        entries = tuple((label, float(score)) for label, score in payload["entries"])
        return EmotionalKnowledge(doc_id=doc_id, kind="distribution",
                                  distribution=LabelDistribution(entries=entries))
    return EmotionalKnowledge(doc_id=doc_id, kind="polarity",
                              polarity=PolarityVerdict(label=payload["label"],
                                                       confidence=float(payload["confidence"])))


class KnowledgeCache:
    """Content-addressed annotation cache over a line-delimited file.

    Entries are keyed by (doc_id, content hash), so editing a document
    invalidates only that document. Unknown record versions are ignored.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[tuple[str, str], dict] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = json.loads(line)
                if record.get("v") != CACHE_VERSION:
                    continue
                self._entries[(record["doc_id"], record["content_hash"])] = record

    def get(self, doc: Document) -> AnnotatedDocument | None:
        record = self._entries.get((doc.doc_id, doc.content_hash()))
        if record is None:
            return None
        commonsense = CommonsenseResult(doc_id=doc.doc_id,
                                        reaction=record["commonsense"]["reaction"],
                                        is_none=record["commonsense"]["is_none"])
        knowledge = knowledge_from_payload(doc.doc_id, record["payload"])
        return AnnotatedDocument(document=doc, knowledge=knowledge, commonsense=commonsense)

    def put(self, annotated: AnnotatedDocument) -> None:
        doc = annotated.document
        record = {
            "v": CACHE_VERSION,
            "doc_id": doc.doc_id,
            "content_hash": doc.content_hash(),
            "kind": annotated.knowledge.kind,
            "payload": knowledge_payload(annotated.knowledge),
            "commonsense": {"reaction": annotated.commonsense.reaction,
                            "is_none": annotated.commonsense.is_none},
        }
        self._entries[(doc.doc_id, doc.content_hash())] = record

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps(self._entries[key], ensure_ascii=False, separators=(",", ":"))
                 for key in sorted(self._entries)]
        self.path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def annotate_corpus(corpus: Corpus, generator, embedder, polarity,
                    cache_path: str | Path | None = None,
                    max_workers: int = 1) -> AnnotationResult:
    """Annotate every document, in input order, with bounded parallelism.

    Documents that fail keep the pipeline going: they are listed in
    ``failures`` and skipped in the output. With a warm cache no service
    calls are made for unchanged documents.
    """
    cache = KnowledgeCache(cache_path) if cache_path is not None else None

    cached: dict[int, AnnotatedDocument] = {}
    pending: list[tuple[int, Document]] = []
    for position, doc in enumerate(corpus.documents):
        hit = cache.get(doc) if cache is not None else None
        if hit is not None:
            cached[position] = hit
        else:
            pending.append((position, doc))

    def annotate_one(doc: Document) -> AnnotatedDocument:
        commonsense = fetch_commonsense(doc, generator)
        knowledge = _knowledge_from_commonsense(doc, commonsense, embedder, polarity)
        return AnnotatedDocument(document=doc, knowledge=knowledge, commonsense=commonsense)

    results: dict[int, AnnotatedDocument] = dict(cached)
    failures: list[tuple[str, str, str]] = []
    if pending:
        workers = max(1, max_workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = pool.map(lambda item: _guarded(annotate_one, item), pending)
            for (position, doc), outcome in zip(pending, outcomes):
                if isinstance(outcome, AnnotatedDocument):
                    results[position] = outcome
                    if cache is not None:
                        cache.put(outcome)
                else:
                    failures.append((doc.doc_id, *outcome))

    if cache is not None:
        cache.save()

    annotated = [results[position] for position in sorted(results)]
    none_count = sum(1 for a in annotated if a.knowledge.kind == "polarity")
    stats = NoneRateStats(total=len(annotated), none_count=none_count)
    return AnnotationResult(annotated=annotated, stats=stats, failures=failures,
                            cache_hits=len(cached))


def _guarded(fn, item):
    _, doc = item
    try:
        return fn(doc)
    except (KnowledgeError, ClientError, ValueError) as e:
        root = e.__cause__ if isinstance(e, KnowledgeError) else e
        kind = "transport" if isinstance(root, ClientError) else "data"
        return (kind, str(e))


def write_annotations(annotated: list[AnnotatedDocument], path: str | Path) -> None:
    """One line per document: doc_id, content hash, knowledge, commonsense."""
    lines = []
    for item in annotated:
        doc = item.document
        lines.append(json.dumps({
            "doc_id": doc.doc_id,
            "content_hash": doc.content_hash(),
            "kind": item.knowledge.kind,
            "payload": knowledge_payload(item.knowledge),
            "commonsense": {"reaction": item.commonsense.reaction,
                            "is_none": item.commonsense.is_none},
        }, ensure_ascii=False, separators=(",", ":")))
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_annotations(corpus: Corpus, path: str | Path) -> list[AnnotatedDocument]:
    """Rejoin an annotation file with its corpus; stale hashes are an error."""
    from .corpus import DataError

    by_id = {doc.doc_id: doc for doc in corpus.documents}
    annotated = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        doc = by_id.get(record["doc_id"])
        if doc is None:
            raise DataError(f"{path}: line {line_no}: unknown doc_id {record['doc_id']!r}")
        if record["content_hash"] != doc.content_hash():
            raise DataError(f"{path}: line {line_no}: annotation is stale for "
                            f"doc {record['doc_id']!r} (content changed)")
        commonsense = CommonsenseResult(doc_id=doc.doc_id,
                                        reaction=record["commonsense"]["reaction"],
                                        is_none=record["commonsense"]["is_none"])
        knowledge = knowledge_from_payload(doc.doc_id, record["payload"])
        annotated.append(AnnotatedDocument(document=doc, knowledge=knowledge,
                                           commonsense=commonsense))
    return annotated
