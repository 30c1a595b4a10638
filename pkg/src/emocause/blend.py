"""Ratio-controlled mixing of causal records into the ECPE training set.

The causal pool is a large general instruction corpus in the line format
``{"causal_id", "instruction", "response", "task_tag"?}``. Selection picks
``causal_part x |ecpe|`` pool records by embedding similarity: pool entries
are ranked per ECPE record by cosine (ties by causal_id ascending) and
taken round-robin, each ECPE record claiming its best not-yet-taken entry,
until the quota is filled or the pool runs out. Selection is free of
randomness, so a smaller quota is always a prefix of a larger one and
ratio sweeps are nested by construction.

Blending wraps the selected records as instruction records and shuffles
the union with Python's seeded Mersenne-Twister Fisher-Yates shuffle
(``random.Random(seed).shuffle``), which is platform-stable: the same
inputs and seed always produce the same bytes on disk.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import DataError
from .knowledge import cosine
from .template import InstructionRecord, record_to_json_line, read_instruction_records

__all__ = [
    "CausalRecord",
    "MixRatio",
    "CausalIngest",
    "BlendDataset",
    "ingest_causal",
    "read_causal_pool",
    "select_causal",
    "blend",
    "sweep",
    "write_blend",
    "read_blend",
    "blend_manifest",
]

PAPER_RATIO_SWEEP = (1, 2, 5, 10)


@dataclass(frozen=True, slots=True)
class CausalRecord:
    causal_id: str
    instruction: str
    response: str
    task_tag: str | None = None

    def __post_init__(self):
        if not self.causal_id:
            raise ValueError("causal_id must be nonempty")
        if not self.instruction or not self.response:
            raise ValueError("instruction and response must be nonempty")


@dataclass(frozen=True, slots=True)
class MixRatio:
    """ECPE-to-causal record-count ratio; the ECPE part is fixed at 1."""

    causal_part: int

    def __post_init__(self):
        if self.causal_part < 0:
            raise ValueError("causal_part must be >= 0")

    def __str__(self) -> str:
        return f"1:{self.causal_part}"

    @classmethod
    def parse(cls, text: str) -> "MixRatio":
        parts = text.split(":")
        if len(parts) == 2 and parts[0].strip() == "1":
            return cls(causal_part=int(parts[1]))
        if len(parts) == 1:
            return cls(causal_part=int(parts[0]))
        raise ValueError(f"ratio must look like '1:5' or '5', got {text!r}")


@dataclass(slots=True)
class CausalIngest:
    records: list[CausalRecord]
    skipped: list[tuple[int, str]]


def ingest_causal(raw: str) -> CausalIngest:
    """Read the causal pool leniently: malformed lines become diagnostics.

    Raises :class:`DataError` only when no line at all yields a valid record.
    """
    records: list[CausalRecord] = []
    skipped: list[tuple[int, str]] = []
    seen: set[str] = set()
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            record = CausalRecord(causal_id=obj["causal_id"], instruction=obj["instruction"],
                                  response=obj["response"], task_tag=obj.get("task_tag"))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            skipped.append((line_no, str(e)))
            continue
        if record.causal_id in seen:
            skipped.append((line_no, f"duplicate causal_id {record.causal_id!r}"))
            continue
        seen.add(record.causal_id)
        records.append(record)
    if not records:
        raise DataError("causal pool contains no valid records")
    return CausalIngest(records=records, skipped=skipped)


def read_causal_pool(path: str | Path) -> CausalIngest:
    return ingest_causal(Path(path).read_text(encoding="utf-8"))


def _selection_order(ecpe: list[InstructionRecord], pool: list[CausalRecord],
                     quota: int, embedder) -> list[CausalRecord]:
    """Round-robin take order, truncated at ``quota``.

    Similarities are computed with the same :func:`~emocause.knowledge.cosine`
    primitive per (ecpe, pool) pair, so an oracle recomputing the full
    matrix sees identical floats and identical rankings.
    """
    if quota <= 0:
        return []
    ecpe_vecs = embedder.embed([r.instruction for r in ecpe])
    pool_vecs = embedder.embed([r.instruction for r in pool])

    rankings = []
    for evec in ecpe_vecs:
        sims = [cosine(evec, pvec) for pvec in pool_vecs]
        order = sorted(range(len(pool)), key=lambda j: (-sims[j], pool[j].causal_id))
        rankings.append(order)

    taken: set[int] = set()
    order_out: list[CausalRecord] = []
    cursors = [0] * len(ecpe)
    while len(order_out) < quota and len(taken) < len(pool):
        progressed = False
        for i in range(len(ecpe)):
            if len(order_out) >= quota:
                break
            cursor = cursors[i]
            ranking = rankings[i]
            while cursor < len(ranking) and ranking[cursor] in taken:
                cursor += 1
            cursors[i] = cursor
            if cursor < len(ranking):
                j = ranking[cursor]
                taken.add(j)
                order_out.append(pool[j])
                cursors[i] = cursor + 1
                progressed = True
        if not progressed:
            break
    return order_out


def select_causal(ecpe: list[InstructionRecord], pool: list[CausalRecord],
                  ratio: MixRatio, embedder) -> list[CausalRecord]:
    """Pick ``ratio.causal_part x |ecpe|`` pool records without replacement.

    Returns exactly ``min(quota, |pool|)`` distinct records, sorted by
    causal_id. A pool smaller than the quota is a shortfall, not an error.
    """
    if not ecpe:
        raise ValueError("ecpe records must be nonempty")
    if not pool:
        raise ValueError("causal pool must be nonempty")
    quota = ratio.causal_part * len(ecpe)
    selected = _selection_order(ecpe, pool, quota, embedder)
    return sorted(selected, key=lambda r: r.causal_id)


def causal_to_record(record: CausalRecord) -> InstructionRecord:
    meta = {"causal_id": record.causal_id}
    if record.task_tag:
        meta["task_tag"] = record.task_tag
    return InstructionRecord(record_id=f"causal:{record.causal_id}", source="causal",
                             instruction=record.instruction, response=record.response,
                             meta=meta)


@dataclass(slots=True)
class BlendDataset:
    records: list[InstructionRecord]
    stats: dict
    seed: int
    ratio: MixRatio | None = None
    shortfall: int = 0

    def __post_init__(self):
        ids = [r.record_id for r in self.records]
        if len(ids) != len(set(ids)):
            raise DataError("duplicate record_id in blend")


def blend(ecpe: list[InstructionRecord], causal: list[CausalRecord], seed: int,
          ratio: MixRatio | None = None, shortfall: int = 0) -> BlendDataset:
    """Shuffle ECPE and causal records together, reproducibly.

    ``ratio`` and ``shortfall`` are carried into the dataset stats and the
    manifest; the record mix itself is fully determined by the inputs and
    the seed.
    """
    if not ecpe:
        raise ValueError("ecpe records must be nonempty")
    records = list(ecpe) + [causal_to_record(c) for c in causal]
    rng = random.Random(seed)
    rng.shuffle(records)
    stats = {"ecpe": len(ecpe), "causal": len(causal), "total": len(records)}
    return BlendDataset(records=records, stats=stats, seed=seed, ratio=ratio,
                        shortfall=shortfall)


def sweep(ecpe: list[InstructionRecord], pool: list[CausalRecord],
          ratios: list[MixRatio], seed: int, embedder) -> list[BlendDataset]:
    """One blend per ratio over a single shared selection order.

    Selections are nested: under one seed the records chosen for a smaller
    ratio are a subset of those chosen for any larger one, so ratio
    comparisons differ only by the added data.
    """
    if not ratios:
        raise ValueError("ratios must be nonempty")
    if not ecpe:
        raise ValueError("ecpe records must be nonempty")
    if not pool:
        raise ValueError("causal pool must be nonempty")
    max_quota = max(r.causal_part for r in ratios) * len(ecpe)
    take_order = _selection_order(ecpe, pool, max_quota, embedder)
    datasets = []
    for ratio in ratios:
        quota = ratio.causal_part * len(ecpe)
        selected = sorted(take_order[:quota], key=lambda r: r.causal_id)
        shortfall = max(0, quota - len(selected))
        datasets.append(blend(ecpe, selected, seed, ratio=ratio, shortfall=shortfall))
    return datasets


def blend_manifest(dataset: BlendDataset, template_version: str | None = None) -> dict:
    return {
        "seed": dataset.seed,
        "ratio": str(dataset.ratio) if dataset.ratio is not None else None,
        "stats": dataset.stats,
        "template_version": template_version,
        "shortfall": dataset.shortfall,
    }


def write_blend(dataset: BlendDataset, path: str | Path,
                template_version: str | None = None) -> Path:
    """Write record lines plus the sidecar ``<stem>.manifest.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = "".join(record_to_json_line(r) + "\n" for r in dataset.records)
    path.write_text(text, encoding="utf-8")
    manifest_path = path.with_suffix(".manifest.json")
    manifest_path.write_text(
        json.dumps(blend_manifest(dataset, template_version), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8")
    return manifest_path


def read_blend(path: str | Path) -> list[InstructionRecord]:
    return read_instruction_records(path)
