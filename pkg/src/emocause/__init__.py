"""emocause: a dataset forge and evaluation harness for emotion-cause
pair extraction.

The pipeline annotates documents with emotional knowledge (a ranked
7-label distribution, or a polarity verdict when the commonsense reaction
is unusable), renders instruction-tuning records, mixes in
similarity-retrieved causal records at controlled ratios, and scores
model predictions with pair-level precision/recall/F1. Every stage runs
offline and deterministically against the bundled mock service.
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Clause, Corpus, DataError, Document, Pair, Violation,
    parse_corpus, emit_corpus, read_corpus, write_corpus, split_corpus, validate_corpus,
)
from .clients import (  # noqa: F401
    ClientError, EmbeddingVector, HttpInferenceClient, InferenceEndpoint,
    MockModelService, PolarityVerdict, ProtocolError, ServiceError, TransportError,
)
from .knowledge import (  # noqa: F401
    EMOTION_LABELS, AnnotatedDocument, AnnotationResult, CommonsenseResult,
    EmotionalKnowledge, KnowledgeError, LabelDistribution, NoneRateStats,
    annotate_corpus, build_knowledge, cosine, fetch_commonsense, score_labels,
)
from .template import (  # noqa: F401
    InstructionRecord, PairSet, TemplateConfig, default_template_config,
    load_template_config, parse_pairs, parse_pairs_detailed, read_instruction_records,
    render_bare_instruction, render_instruction, render_response, write_instruction_records,
)
from .blend import (  # noqa: F401
    BlendDataset, CausalRecord, MixRatio, PAPER_RATIO_SWEEP,
    blend, ingest_causal, read_causal_pool, select_causal, sweep, write_blend,
)
from .evaluation import (  # noqa: F401
    ComparisonTable, MatchCounts, Metrics, RunReport,
    compare_runs, evaluate_run, f1_score, match_pairs, prf1,
    read_predictions, write_predictions, write_run_report, read_run_report,
)
