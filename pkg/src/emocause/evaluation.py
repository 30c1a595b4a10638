"""Pair-level scoring of model predictions against gold annotations.

A predicted pair is correct iff it exactly matches a gold
(emotion clause, cause clause) pair. Counts are micro-averaged over the
corpus: precision is correct/proposed, recall is correct/gold, and F1 is
their harmonic mean (zero when both are zero). Predictions are sets --
duplicated pairs in model output count once and are surfaced as a
diagnostic, and predicted indices outside a document's clause range are
filtered out before counting (the filtered count is reported, so the
opposite convention can be reconstructed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .corpus import Corpus, DataError
from .template import PairSet, parse_pairs_detailed

__all__ = [
    "MatchCounts",
    "Metrics",
    "DocResult",
    "RunReport",
    "ComparisonTable",
    "match_pairs",
    "prf1",
    "f1_score",
    "evaluate_run",
    "compare_runs",
    "read_predictions",
    "write_predictions",
    "write_run_report",
    "read_run_report",
]


@dataclass(frozen=True, slots=True)
class MatchCounts:
    correct: int
    proposed: int
    gold: int

    def __post_init__(self):
        if self.correct < 0 or self.proposed < 0 or self.gold < 0:
            raise ValueError("counts must be non-negative")
        if self.correct > self.proposed:
            raise ValueError("correct cannot exceed proposed")
        if self.correct > self.gold:
            raise ValueError("correct cannot exceed gold")

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.correct + other.correct,
                           self.proposed + other.proposed,
                           self.gold + other.gold)


@dataclass(frozen=True, slots=True)
class Metrics:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def match_pairs(gold: PairSet, predicted: PairSet) -> MatchCounts:
    """Exact-match counting: (|gold & predicted|, |predicted|, |gold|)."""
    if not gold:
        raise ValueError("gold pair set must be nonempty")
    return MatchCounts(correct=len(gold & predicted), proposed=len(predicted), gold=len(gold))


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; zero when both are zero."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def prf1(counts: MatchCounts) -> Metrics:
    """Micro-averaged precision/recall/F1 from corpus-wide counts."""
    if counts.gold <= 0:
        raise ValueError("gold count must be positive")
    precision = counts.correct / counts.proposed if counts.proposed else 0.0
    recall = counts.correct / counts.gold
    return Metrics(precision=precision, recall=recall, f1=f1_score(precision, recall))


@dataclass(frozen=True, slots=True)
class DocResult:
    doc_id: str
    gold: PairSet
    predicted: PairSet
    no_match: bool
    missing: bool = False
    filtered: int = 0
    duplicates: int = 0

    @property
    def counts(self) -> MatchCounts:
        return match_pairs(self.gold, self.predicted)


@dataclass(slots=True)
class RunReport:
    run_id: str
    per_doc: list[DocResult]
    totals: MatchCounts
    metrics: Metrics
    manifest_ref: str = ""
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "manifest_ref": self.manifest_ref,
            "totals": {"correct": self.totals.correct, "proposed": self.totals.proposed,
                       "gold": self.totals.gold},
            "metrics": self.metrics.to_dict(),
            "diagnostics": self.diagnostics,
            "per_doc": [
                {"doc_id": r.doc_id,
                 "gold": [list(p) for p in sorted(r.gold)],
                 "predicted": [list(p) for p in sorted(r.predicted)],
                 "no_match": r.no_match, "missing": r.missing,
                 "filtered": r.filtered, "duplicates": r.duplicates}
                for r in self.per_doc
            ],
        }

    def render_text(self) -> str:
        m = self.metrics
        lines = [
            f"run {self.run_id}",
            f"  documents: {len(self.per_doc)}",
            f"  counts: correct={self.totals.correct} proposed={self.totals.proposed} "
            f"gold={self.totals.gold}",
            f"  precision={m.precision:.4f} recall={m.recall:.4f} f1={m.f1:.4f}",
        ]
        for key in ("filtered_pairs", "duplicate_pairs", "no_match_docs", "missing_docs"):
            if self.diagnostics.get(key):
                lines.append(f"  {key}: {self.diagnostics[key]}")
        return "\n".join(lines) + "\n"


def evaluate_run(test: Corpus, predictions: Mapping[str, str], run_id: str = "run",
                 manifest_ref: str = "") -> RunReport:
    """Score raw model outputs for every test document.

    A missing prediction scores as an empty output and is flagged;
    anomalies (filtered out-of-range pairs, duplicates, unparseable
    outputs) land in the report's diagnostics rather than raising.
    """
    per_doc: list[DocResult] = []
    totals = MatchCounts(0, 0, 0)
    filtered_total = 0
    duplicate_total = 0
    missing_docs: list[str] = []
    no_match_docs = 0
    for doc in test.documents:
        if not doc.gold_pairs:
            raise DataError(f"doc {doc.doc_id!r} has no gold pairs; cannot be scored")
        raw = predictions.get(doc.doc_id)
        missing = raw is None
        parse = parse_pairs_detailed(raw if raw is not None else "")
        in_range = frozenset(p for p in parse.pairs
                             if 1 <= p.emotion <= doc.clause_count
                             and 1 <= p.cause <= doc.clause_count)
        filtered = len(parse.pairs) - len(in_range)
        result = DocResult(doc_id=doc.doc_id, gold=doc.gold_pairs, predicted=in_range,
                           no_match=parse.no_match, missing=missing,
                           filtered=filtered, duplicates=parse.duplicates)
        per_doc.append(result)
        totals = totals + result.counts
        filtered_total += filtered
        duplicate_total += parse.duplicates
        if missing:
            missing_docs.append(doc.doc_id)
        if parse.no_match:
            no_match_docs += 1
    if totals.gold == 0:
        raise DataError("test corpus has no gold pairs to score against")
    metrics = prf1(totals)
    diagnostics = {
        "filtered_pairs": filtered_total,
        "duplicate_pairs": duplicate_total,
        "no_match_docs": no_match_docs,
        "missing_docs": missing_docs,
    }
    return RunReport(run_id=run_id, per_doc=per_doc, totals=totals, metrics=metrics,
                     manifest_ref=manifest_ref, diagnostics=diagnostics)


@dataclass(slots=True)
class ComparisonTable:
    """Runs ranked by F1 (descending; ties by run_id), best row marked."""

    rows: list[dict]

    def to_dict(self) -> dict:
        return {"rows": self.rows}

    def render_text(self) -> str:
        header = f"{'':2}{'run':<24}{'P':>9}{'R':>9}{'F1':>9}"
        lines = [header]
        for row in self.rows:
            mark = "* " if row["best"] else "  "
            lines.append(f"{mark}{row['run_id']:<24}{row['precision']:>9.4f}"
                         f"{row['recall']:>9.4f}{row['f1']:>9.4f}")
        return "\n".join(lines) + "\n"


def compare_runs(reports: list[RunReport]) -> ComparisonTable:
    if not reports:
        raise ValueError("at least one report is required")
    ordered = sorted(reports, key=lambda r: (-r.metrics.f1, r.run_id))
    best_f1 = ordered[0].metrics.f1
    rows = [{
        "run_id": r.run_id,
        "precision": r.metrics.precision,
        "recall": r.metrics.recall,
        "f1": r.metrics.f1,
        "best": r.metrics.f1 == best_f1,
        "manifest_ref": r.manifest_ref,
    } for r in ordered]
    return ComparisonTable(rows=rows)


# --- file formats -------------------------------------------------------------

def read_predictions(path: str | Path) -> dict[str, str]:
    """Line-delimited ``{"doc_id", "output"}`` records; duplicate ids are an error."""
    predictions: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            doc_id, output = obj["doc_id"], obj["output"]
        except (json.JSONDecodeError, KeyError) as e:
            raise DataError(f"{path}: line {line_no}: {e}") from e
        if doc_id in predictions:
            raise DataError(f"{path}: line {line_no}: duplicate doc_id {doc_id!r}")
        predictions[doc_id] = output
    return predictions


def write_predictions(predictions: Mapping[str, str], path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    text = "".join(json.dumps({"doc_id": k, "output": v}, ensure_ascii=False,
                              separators=(",", ":")) + "\n"
                   for k, v in predictions.items())
    Path(path).write_text(text, encoding="utf-8")


def write_run_report(report: RunReport, directory: str | Path) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    json_path = directory / f"report_{report.run_id}.json"
    text_path = directory / f"report_{report.run_id}.txt"
    json_path.write_text(json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n",
                         encoding="utf-8")
    text_path.write_text(report.render_text(), encoding="utf-8")
    return json_path, text_path


def read_run_report(path: str | Path) -> RunReport:
    from .corpus import Pair

    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    per_doc = [DocResult(doc_id=r["doc_id"],
                         gold=frozenset(Pair(*p) for p in r["gold"]),
                         predicted=frozenset(Pair(*p) for p in r["predicted"]),
                         no_match=r["no_match"], missing=r["missing"],
                         filtered=r["filtered"], duplicates=r["duplicates"])
               for r in obj["per_doc"]]
    totals = MatchCounts(**obj["totals"])
    metrics = Metrics(**obj["metrics"])
    return RunReport(run_id=obj["run_id"], per_doc=per_doc, totals=totals, metrics=metrics,
                     manifest_ref=obj.get("manifest_ref", ""),
                     diagnostics=dict(obj.get("diagnostics", {})))
