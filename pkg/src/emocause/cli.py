"""Command-line orchestration of the full pipeline.

One JSON config file drives every command; CLI flags override config
keys, and the effective values land in a per-command run manifest next to
the outputs. With mock clients and a fixed seed, two runs of the same
config produce byte-identical artifacts; wall-clock timings therefore go
to a separate ``timings.log``, never into the manifest.

Commands: ``validate``, ``annotate``, ``blend``, ``sweep``, ``evaluate``,
``compare``. Exit codes: 0 success, 1 data error, 2 transport error,
3 config error. The only environment input is ``EMOCAUSE_TOKEN``, the
bearer token attached to real (non-mock) endpoints.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .blend import MixRatio, blend, read_causal_pool, sweep, write_blend
from .clients import ClientError, CountingClient, HttpInferenceClient, InferenceEndpoint, MockModelService
from .corpus import Corpus, DataError, read_corpus, validate_corpus
from .evaluation import compare_runs, evaluate_run, read_predictions, read_run_report, write_predictions, write_run_report
from .knowledge import annotate_corpus, read_annotations, write_annotations
from .template import (TemplateConfig, default_template_config, load_template_config,
                       render_bare_instruction, render_instruction, write_instruction_records)

__all__ = ["ConfigError", "RunConfig", "load_config", "main", "entry"]

EXIT_OK = 0
EXIT_DATA = 1
EXIT_TRANSPORT = 2
EXIT_CONFIG = 3

AUTH_TOKEN_ENV = "EMOCAUSE_TOKEN"

CLIENT_ROLES = ("generator", "embedder", "polarity", "completion")


class ConfigError(Exception):
    """Invalid or incomplete run configuration (exit code 3)."""


@dataclass(slots=True)
class RunConfig:
    seed: int
    output_dir: Path
    train_path: Path | None = None
    test_path: Path | None = None
    causal_pool_path: Path | None = None
    clients: dict = field(default_factory=lambda: {role: "mock" for role in CLIENT_ROLES})
    mock_none_fraction: float = 0.43
    mock_embed_dim: int = 64
    template_config_path: Path | None = None
    ratios: list[int] = field(default_factory=lambda: [5])
    workers: int = 1
    run_id: str = "run"
    use_emotional_knowledge: bool = True
    use_causal_knowledge: bool = True

    def template(self) -> TemplateConfig:
        if self.template_config_path is not None:
            return load_template_config(self.template_config_path)
        return default_template_config()

    def snapshot(self) -> dict:
        """Effective config minus output locations, for the manifest."""
        return {
            "seed": self.seed,
            "corpus": {
                "train": str(self.train_path) if self.train_path else None,
                "test": str(self.test_path) if self.test_path else None,
                "causal_pool": str(self.causal_pool_path) if self.causal_pool_path else None,
            },
            "clients": self.clients,
            "mock": {"none_fraction": self.mock_none_fraction, "embed_dim": self.mock_embed_dim},
            "template_config": str(self.template_config_path) if self.template_config_path else None,
            "ratios": self.ratios,
            "workers": self.workers,
            "run_id": self.run_id,
            "use_emotional_knowledge": self.use_emotional_knowledge,
            "use_causal_knowledge": self.use_causal_knowledge,
        }


def _existing_path(raw: str, role: str) -> Path:
    path = Path(raw)
    if not path.exists():
        raise ConfigError(f"{role} path does not exist: {path}")
    return path


def load_config(path: str | Path, overrides: argparse.Namespace | None = None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e

    def over(name, default):
        value = getattr(overrides, name, None) if overrides is not None else None
        return value if value is not None else default

    seed = over("seed", raw.get("seed"))
    if seed is None:
        raise ConfigError("seed must be set explicitly (config key 'seed' or --seed)")
    output_dir = over("output_dir", raw.get("output_dir"))
    if output_dir is None:
        raise ConfigError("output_dir must be set (config key 'output_dir' or --output-dir)")

    corpus_cfg = raw.get("corpus", {})
    clients_cfg = {role: raw.get("clients", {}).get(role, "mock") for role in CLIENT_ROLES}
    for role, spec in clients_cfg.items():
        if spec != "mock" and not (isinstance(spec, dict) and "base_url" in spec):
            raise ConfigError(f"client role {role!r} must be 'mock' or an object with base_url")

    mock_cfg = raw.get("mock", {})
    ratios_raw = over("ratios", raw.get("ratios", [5]))
    try:
        ratios = [MixRatio.parse(str(r)).causal_part for r in ratios_raw]
    except ValueError as e:
        raise ConfigError(str(e)) from e

    config = RunConfig(
        seed=int(seed),
        output_dir=Path(output_dir),
        train_path=_existing_path(corpus_cfg["train"], "train corpus") if corpus_cfg.get("train") else None,
        test_path=_existing_path(corpus_cfg["test"], "test corpus") if corpus_cfg.get("test") else None,
        causal_pool_path=_existing_path(corpus_cfg["causal_pool"], "causal pool")
        if corpus_cfg.get("causal_pool") else None,
        clients=clients_cfg,
        mock_none_fraction=float(mock_cfg.get("none_fraction", 0.43)),
        mock_embed_dim=int(mock_cfg.get("embed_dim", 64)),
        template_config_path=_existing_path(raw["template_config"], "template config")
        if raw.get("template_config") else None,
        ratios=ratios,
        workers=int(over("workers", raw.get("workers", 1))),
        run_id=str(over("run_id", raw.get("run_id", "run"))),
        use_emotional_knowledge=not over("no_emotional_knowledge", False),
        use_causal_knowledge=not over("no_causal_knowledge", False),
    )
    if not config.use_causal_knowledge:
        config.ratios = [0]
    return config


class _Clients:
    """Per-role clients with call counting; mock roles share one service."""

    def __init__(self, config: RunConfig):
        shared_mock = MockModelService(none_fraction=config.mock_none_fraction,
                                       embed_dim=config.mock_embed_dim)
        self.by_role: dict[str, CountingClient] = {}
        for role in CLIENT_ROLES:
            spec = config.clients[role]
            if spec == "mock":
                self.by_role[role] = CountingClient(shared_mock)
            else:
                endpoint = InferenceEndpoint(
                    base_url=spec["base_url"],
                    timeout_ms=int(spec.get("timeout_ms", 10_000)),
                    max_retries=int(spec.get("max_retries", 2)),
                    auth_token=os.environ.get(AUTH_TOKEN_ENV),
                )
                self.by_role[role] = CountingClient(HttpInferenceClient(endpoint))

    def __getattr__(self, role):
        return self.by_role[role]

    def call_counts(self) -> dict[str, int]:
        return {role: client.calls for role, client in self.by_role.items()}


class _Timings:
    def __init__(self, output_dir: Path):
        self.path = output_dir / "timings.log"
        self.entries: list[tuple[str, float]] = []

    def stage(self, name: str):
        return _Stage(self, name)

    def flush(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as f:
            for name, seconds in self.entries:
                f.write(f"{name}\t{seconds:.3f}\n")
        self.entries.clear()


class _Stage:
    def __init__(self, timings: _Timings, name: str):
        self.timings = timings
        self.name = name

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.timings.entries.append((self.name, time.monotonic() - self.start))
        return False


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _input_hashes(config: RunConfig) -> dict:
    hashes = {}
    for name, path in (("train", config.train_path), ("test", config.test_path),
                       ("causal_pool", config.causal_pool_path),
                       ("template_config", config.template_config_path)):
        if path is not None:
            hashes[name] = {"path": str(path), "sha256": _sha256_file(path)}
    return hashes


def _write_manifest(config: RunConfig, command: str, extra: dict) -> Path:
    manifest = {
        "tool_version": __version__,
        "command": command,
        "config": config.snapshot(),
        "inputs": _input_hashes(config),
    }
    manifest.update(extra)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    path = config.output_dir / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def _require(config: RunConfig, **paths) -> None:
    missing = [name for name, value in paths.items() if value is None]
    if missing:
        raise ConfigError(f"this command requires config paths: {', '.join(missing)}")


def _load_split(config: RunConfig, split: str) -> Corpus:
    path = config.train_path if split == "train" else config.test_path
    assert path is not None
    return read_corpus(path, split_tag=split)


def _annotation_path(config: RunConfig, split: str) -> Path:
    return config.output_dir / f"annotated_{split}.jsonl"


def _ecpe_records(config: RunConfig, split: str, template: TemplateConfig):
    """Instruction records for a split, honoring the emotional-knowledge ablation."""
    corpus = _load_split(config, split)
    if not config.use_emotional_knowledge:
        return [render_bare_instruction(doc, template, split_tag=split) for doc in corpus]
    annotation_file = _annotation_path(config, split)
    if not annotation_file.exists():
        raise DataError(f"annotations not found at {annotation_file}; run 'annotate' first "
                        f"or pass --no-emotional-knowledge")
    annotated = read_annotations(corpus, annotation_file)
    return [render_instruction(a, template, split_tag=split) for a in annotated]


# --- commands ----------------------------------------------------------------

def cmd_validate(config: RunConfig) -> int:
    any_violations = False
    for split, path in (("train", config.train_path), ("test", config.test_path)):
        if path is None:
            continue
        corpus = read_corpus(path, split_tag=split)
        violations = validate_corpus(corpus)
        print(f"{split}: {len(corpus)} documents, {len(violations)} violations")
        for v in violations:
            print(f"  {v.doc_id}: {v.rule}: {v.message}")
            any_violations = True
    if config.causal_pool_path is not None:
        ingest = read_causal_pool(config.causal_pool_path)
        print(f"causal_pool: {len(ingest.records)} records, {len(ingest.skipped)} skipped lines")
        for line_no, reason in ingest.skipped:
            print(f"  line {line_no}: {reason}")
    return EXIT_DATA if any_violations else EXIT_OK


def cmd_annotate(config: RunConfig) -> int:
    _require(config, train=config.train_path, test=config.test_path)
    if not config.use_emotional_knowledge:
        raise ConfigError("annotate does nothing with --no-emotional-knowledge")
    clients = _Clients(config)
    timings = _Timings(config.output_dir)
    stats = {}
    failures = []
    transport_failures = 0
    for split in ("train", "test"):
        corpus = _load_split(config, split)
        cache_path = config.output_dir / "cache" / f"{split}.jsonl"
        with timings.stage(f"annotate-{split}"):
            result = annotate_corpus(corpus, generator=clients.generator,
                                     embedder=clients.embedder, polarity=clients.polarity,
                                     cache_path=cache_path, max_workers=config.workers)
        write_annotations(result.annotated, _annotation_path(config, split))
        stats[split] = {**result.stats.to_dict(), "cache_hits": result.cache_hits,
                        "failed_docs": [doc_id for doc_id, _, _ in result.failures]}
        failures.extend(result.failures)
        transport_failures += result.transport_failures
    timings.flush()
    _write_manifest(config, "annotate", {"none_rate_stats": stats,
                                         "similarity": "raw-cosine",
                                         "client_calls": clients.call_counts()})
    for doc_id, kind, message in failures:
        print(f"FAILED {doc_id} ({kind}): {message}", file=sys.stderr)
    if transport_failures:
        return EXIT_TRANSPORT
    if failures:
        return EXIT_DATA
    for split in ("train", "test"):
        print(f"{split}: annotated {stats[split]['total']} docs, "
              f"none_rate={stats[split]['none_rate']}, cache_hits={stats[split]['cache_hits']}")
    return EXIT_OK


def _blend_one(config: RunConfig, datasets, template) -> list[dict]:
    entries = []
    for dataset in datasets:
        ratio_tag = str(dataset.ratio).replace(":", "-") if dataset.ratio else "custom"
        out_path = config.output_dir / f"blend_{ratio_tag}.jsonl"
        write_blend(dataset, out_path, template_version=template.version)
        entries.append({"ratio": str(dataset.ratio), "file": out_path.name,
                        "stats": dataset.stats, "shortfall": dataset.shortfall})
    return entries


def cmd_blend(config: RunConfig, command: str = "blend") -> int:
    _require(config, train=config.train_path)
    template = config.template()
    clients = _Clients(config)
    timings = _Timings(config.output_dir)
    with timings.stage("render"):
        ecpe = _ecpe_records(config, "train", template)
    mix_ratios = [MixRatio(r) for r in config.ratios]
    with timings.stage("select+blend"):
        if all(r.causal_part == 0 for r in mix_ratios):
            datasets = [blend(ecpe, [], config.seed, ratio=r) for r in mix_ratios]
        else:
            _require(config, causal_pool=config.causal_pool_path)
            pool = read_causal_pool(config.causal_pool_path).records
            datasets = sweep(ecpe, pool, mix_ratios, config.seed, embedder=clients.embedder)
    entries = _blend_one(config, datasets, template)
    timings.flush()
    _write_manifest(config, command, {"blends": entries,
                                      "template_version": template.version,
                                      "client_calls": clients.call_counts()})
    for entry in entries:
        shortfall = f" (shortfall {entry['shortfall']})" if entry["shortfall"] else ""
        print(f"ratio {entry['ratio']}: {entry['stats']['total']} records "
              f"-> {entry['file']}{shortfall}")
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    return cmd_blend(config, command="sweep")


def cmd_evaluate(config: RunConfig, predictions_path: str | None) -> int:
    _require(config, test=config.test_path)
    test = _load_split(config, "test")
    template = config.template()
    timings = _Timings(config.output_dir)
    clients = None
    if predictions_path is not None:
        predictions = read_predictions(predictions_path)
        predictions_ref = str(predictions_path)
    else:
        clients = _Clients(config)
        records = _ecpe_records(config, "test", template)
        predictions = {}
        with timings.stage("complete"):
            for record in records:
                predictions[record.meta["doc_id"]] = clients.completion.complete(record.instruction)
        out = config.output_dir / "predictions.jsonl"
        write_predictions(predictions, out)
        predictions_ref = out.name
    with timings.stage("score"):
        report = evaluate_run(test, predictions, run_id=config.run_id,
                              manifest_ref="evaluate_manifest.json")
    json_path, _ = write_run_report(report, config.output_dir)
    timings.flush()
    extra = {"predictions": predictions_ref, "report": json_path.name,
             "decode": "greedy" if predictions_path is None else "external",
             "metrics": report.metrics.to_dict(),
             "diagnostics": report.diagnostics}
    if clients is not None:
        extra["client_calls"] = clients.call_counts()
    _write_manifest(config, "evaluate", extra)
    print(report.render_text(), end="")
    return EXIT_OK


def cmd_compare(config: RunConfig, report_paths: list[str]) -> int:
    reports = [read_run_report(p) for p in report_paths]
    table = compare_runs(reports)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / "comparison.json").write_text(
        json.dumps(table.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    (config.output_dir / "comparison.txt").write_text(table.render_text(), encoding="utf-8")
    print(table.render_text(), end="")
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emocause",
                                     description="Dataset forge and evaluation harness "
                                                 "for emotion-cause pair extraction.")
    parser.add_argument("--version", action="version", version=f"emocause {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="run config JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--output-dir", dest="output_dir", default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--run-id", dest="run_id", default=None)
        p.add_argument("--ratio", dest="ratios", action="append", default=None,
                       help="mixing ratio like 1:5; repeatable")
        p.add_argument("--no-emotional-knowledge", dest="no_emotional_knowledge",
                       action="store_true", default=None,
                       help="skip knowledge injection; templates carry task + document only")
        p.add_argument("--no-causal-knowledge", dest="no_causal_knowledge",
                       action="store_true", default=None,
                       help="blend at ratio 1:0 (no causal records)")

    common(sub.add_parser("validate", help="check corpora against the data model"))
    common(sub.add_parser("annotate", help="attach emotional knowledge to train and test"))
    common(sub.add_parser("blend", help="build the blended training set"))
    common(sub.add_parser("sweep", help="build one blend per configured ratio"))
    evaluate = sub.add_parser("evaluate", help="score predictions on the test split")
    common(evaluate)
    evaluate.add_argument("--predictions", default=None,
                          help="existing predictions file; omit to query the completion client")
    compare = sub.add_parser("compare", help="rank run reports by F1")
    common(compare)
    compare.add_argument("reports", nargs="+", help="report JSON files")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        config = load_config(args.config, overrides=args)
        if args.command == "validate":
            return cmd_validate(config)
        if args.command == "annotate":
            return cmd_annotate(config)
        if args.command == "blend":
            return cmd_blend(config)
        if args.command == "sweep":
            return cmd_sweep(config)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.predictions)
        if args.command == "compare":
            return cmd_compare(config, args.reports)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ClientError as e:
        print(f"transport error: {e}", file=sys.stderr)
        return EXIT_TRANSPORT
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
