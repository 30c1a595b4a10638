import numpy as np
import pytest
from hypothesis import given, strategies as st

from emocause.clients import CountingClient, EmbeddingVector, MockModelService, TransportError
from emocause.corpus import Clause, Corpus, Document, Pair
from emocause.knowledge import (
    EMOTION_LABELS, AnnotatedDocument, CommonsenseResult, EmotionalKnowledge,
    KnowledgeError, LabelDistribution, annotate_corpus, build_knowledge, cosine,
    fetch_commonsense, is_none_reaction, read_annotations, score_labels, write_annotations,
)

_LABEL_INDEX = {label: i for i, label in enumerate(EMOTION_LABELS)}


def _vec(*values):
    return EmbeddingVector(np.array(values, dtype=float))


# --- cosine --------------------------------------------------------------------

def test_cosine_identical_direction():
    assert cosine(_vec(1, 0), _vec(1, 0)) == pytest.approx(1.0, abs=1e-12)


def test_cosine_orthogonal():
    assert cosine(_vec(1, 0), _vec(0, 1)) == pytest.approx(0.0, abs=1e-12)


def test_cosine_hand_computed():
    # dot = 2 + 2 + 4 = 8; |u| = |v| = 3; cosine = 8/9
    assert cosine(_vec(1, 2, 2), _vec(2, 1, 2)) == pytest.approx(8 / 9, abs=1e-12)


def test_cosine_errors():
    with pytest.raises(ValueError, match="dimension mismatch"):
        cosine(_vec(1, 0), _vec(1, 0, 0))
    with pytest.raises(ValueError, match="zero vector"):
        cosine(_vec(0, 0), _vec(1, 0))


_vectors = st.lists(st.floats(-5, 5), min_size=4, max_size=4).filter(
    lambda v: any(abs(x) > 1e-6 for x in v))


@given(_vectors, _vectors)
def test_cosine_symmetry_property(u_values, v_values):
    u, v = _vec(*u_values), _vec(*v_values)
    assert cosine(u, v) == pytest.approx(cosine(v, u), abs=1e-12)
    assert abs(cosine(u, v)) <= 1.0 + 1e-9
    assert cosine(u, u) == pytest.approx(1.0, abs=1e-12)


# --- none detection and commonsense ---------------------------------------------

@pytest.mark.parametrize("reaction,expected", [
    ("none", True), (" None ", True), ("NONE", True),
    ("nonetheless", False), ("happy", False), ("no", False),
])
def test_is_none_reaction(reaction, expected):
    assert is_none_reaction(reaction) is expected


def test_commonsense_result_flag_consistency():
    result = CommonsenseResult.from_reaction("d", " None ")
    assert result.is_none and result.reaction == "None"
    with pytest.raises(ValueError):
        CommonsenseResult(doc_id="d", reaction="happy", is_none=True)


def _doc(doc_id, *texts, pairs=((1, 2),)):
    clauses = tuple(Clause(i + 1, t) for i, t in enumerate(texts))
    return Document(doc_id, clauses, frozenset(Pair(*p) for p in pairs))


def test_fetch_commonsense_uses_joined_text(mock_service):
    doc = _doc("d", "the bridge creaked", "under the truck")
    result = fetch_commonsense(doc, mock_service)
    assert result.reaction == mock_service.generate_reaction("the bridge creaked under the truck")
    assert result.doc_id == "d"


def test_fetch_commonsense_wraps_client_errors():
    class Broken:
        def generate_reaction(self, text):
            raise TransportError("connection refused")

    with pytest.raises(KnowledgeError, match="'d'"):
        fetch_commonsense(_doc("d", "a", "b"), Broken())


# --- label distribution ----------------------------------------------------------

def test_distribution_invariants_enforced():
    entries = tuple((label, 0.0) for label in EMOTION_LABELS)
    LabelDistribution(entries=entries)  # canonical tie order is fine
    with pytest.raises(ValueError):
        LabelDistribution(entries=entries[:-1])
    with pytest.raises(ValueError):
        LabelDistribution(entries=tuple(reversed(entries)))  # breaks tie order


def test_distribution_from_scores_sorts():
    scores = {label: 0.1 for label in EMOTION_LABELS}
    scores["anger"] = 0.9
    scores["fear"] = -0.5
    dist = LabelDistribution.from_scores(scores)
    assert dist.entries[0] == ("anger", 0.9)
    assert dist.entries[-1] == ("fear", -0.5)
    middle = [label for label, _ in dist.entries[1:-1]]
    assert middle == [l for l in EMOTION_LABELS if l not in ("anger", "fear")]


def test_score_labels_identical_text_ranks_first(mock_service):
    dist = score_labels("happiness", mock_service)
    assert dist.entries[0] == ("happiness", pytest.approx(1.0, abs=1e-12))


def test_score_labels_is_permutation(mock_service):
    dist = score_labels("joyful", mock_service)
    assert sorted(label for label, _ in dist.entries) == sorted(EMOTION_LABELS)


def test_score_labels_brute_force_oracle(mock_service):
    # independent recomputation: embed, 7 cosines, explicit sort
    for reaction in ("joyful", "terrified and alone", "calm", "a strange mix of pride and dread"):
        dist = score_labels(reaction, mock_service)
        vectors = mock_service.embed([reaction, *EMOTION_LABELS])
        expected = [(label, cosine(vectors[0], vec))
                    for label, vec in zip(EMOTION_LABELS, vectors[1:])]
        expected.sort(key=lambda kv: (-kv[1], _LABEL_INDEX[kv[0]]))
        assert list(dist.entries) == expected


def test_score_labels_rejects_none_sentinel(mock_service):
    with pytest.raises(ValueError):
        score_labels("none", mock_service)
    with pytest.raises(ValueError):
        score_labels("  ", mock_service)


# --- knowledge dispatch -----------------------------------------------------------

def test_build_knowledge_distribution_branch(mock_service):
    doc = _doc("k1", "the bridge creaked", "under the truck")  # reaction "happy"
    knowledge = build_knowledge(doc, mock_service, mock_service, mock_service)
    assert knowledge.kind == "distribution"
    assert knowledge.distribution is not None and knowledge.polarity is None
    assert len(knowledge.distribution.entries) == 7


def test_build_knowledge_polarity_branch(mock_service):
    doc = _doc("k2", "Maya read the", "letter twice")  # joined text hashes to the none bucket
    assert mock_service.generate_reaction(doc.text()) == "none"
    knowledge = build_knowledge(doc, mock_service, mock_service, mock_service)
    assert knowledge.kind == "polarity"
    assert knowledge.polarity is not None and knowledge.distribution is None
    assert knowledge.polarity.label in ("POSITIVE", "NEGATIVE")


def test_knowledge_kinds_are_exclusive():
    with pytest.raises(ValueError):
        EmotionalKnowledge(doc_id="d", kind="distribution", distribution=None)
    with pytest.raises(ValueError):
        EmotionalKnowledge(doc_id="d", kind="polarity", polarity=None)
    with pytest.raises(ValueError):
        EmotionalKnowledge(doc_id="d", kind="both")


# --- annotate_corpus ----------------------------------------------------------------

def test_annotate_corpus_order_and_stats(toy_corpus, mock_service):
    result = annotate_corpus(toy_corpus, mock_service, mock_service, mock_service)
    assert [a.document.doc_id for a in result.annotated] == [d.doc_id for d in toy_corpus]
    assert result.failures == []
    assert result.stats.total == 20
    # frozen from the documented hash rule over each document's joined text
    expected_none = {"d03", "d04", "d06", "d08", "d09", "d12", "d18", "d20"}
    polarity_docs = {a.document.doc_id for a in result.annotated
                     if a.knowledge.kind == "polarity"}
    assert polarity_docs == expected_none
    assert result.stats.none_count == len(expected_none)
    assert result.stats.none_rate == pytest.approx(0.4)


def test_annotate_corpus_parallel_matches_serial(toy_corpus, mock_service):
    serial = annotate_corpus(toy_corpus, mock_service, mock_service, mock_service, max_workers=1)
    parallel = annotate_corpus(toy_corpus, mock_service, mock_service, mock_service, max_workers=8)
    assert [a.knowledge for a in serial.annotated] == [a.knowledge for a in parallel.annotated]


def test_annotate_corpus_empty():
    result = annotate_corpus(Corpus(), MockModelService(gold_responses={}),
                             MockModelService(gold_responses={}), MockModelService(gold_responses={}))
    assert result.annotated == []
    assert result.stats.total == 0
    assert result.stats.none_rate is None


def test_annotate_corpus_cache_skips_calls(toy_corpus, mock_service, tmp_path):
    cache = tmp_path / "knowledge.cache.jsonl"
    generator = CountingClient(mock_service)
    embedder = CountingClient(mock_service)
    polarity = CountingClient(mock_service)
    first = annotate_corpus(toy_corpus, generator, embedder, polarity, cache_path=cache)
    cold_calls = generator.calls + embedder.calls + polarity.calls
    assert cold_calls > 0 and first.cache_hits == 0

    generator2 = CountingClient(mock_service)
    second = annotate_corpus(toy_corpus, generator2, CountingClient(mock_service),
                             CountingClient(mock_service), cache_path=cache)
    assert generator2.calls == 0
    assert second.cache_hits == len(toy_corpus)
    assert [a.knowledge for a in second.annotated] == [a.knowledge for a in first.annotated]


def test_annotate_corpus_cache_invalidates_changed_doc(toy_corpus, mock_service, tmp_path):
    cache = tmp_path / "knowledge.cache.jsonl"
    annotate_corpus(toy_corpus, mock_service, mock_service, mock_service, cache_path=cache)
    docs = list(toy_corpus.documents)
    original = docs[0]
    docs[0] = Document(original.doc_id,
                       original.clauses[:-1] + (Clause(len(original.clauses), "a changed ending"),),
                       original.gold_pairs, original.emotion_label)
    edited = Corpus(tuple(docs), toy_corpus.split_tag)
    generator = CountingClient(mock_service)
    result = annotate_corpus(edited, generator, CountingClient(mock_service),
                             CountingClient(mock_service), cache_path=cache)
    assert generator.calls == 1  # only the edited document is recomputed
    assert result.cache_hits == len(toy_corpus) - 1


def test_annotate_corpus_partial_failure(toy_corpus, mock_service):
    class Flaky:
        def generate_reaction(self, text):
            if "bar association" in text:  # only d01 trips this
                raise TransportError("boom")
            return mock_service.generate_reaction(text)

    result = annotate_corpus(toy_corpus, Flaky(), mock_service, mock_service)
    assert len(result.annotated) == 19
    assert [f[0] for f in result.failures] == ["d01"]
    assert result.failures[0][1] == "transport"
    assert result.transport_failures == 1


# --- annotation files ------------------------------------------------------------

def test_annotation_round_trip(toy_corpus, mock_service, tmp_path):
    result = annotate_corpus(toy_corpus, mock_service, mock_service, mock_service)
    path = tmp_path / "annotated.jsonl"
    write_annotations(result.annotated, path)
    loaded = read_annotations(toy_corpus, path)
    assert [a.knowledge for a in loaded] == [a.knowledge for a in result.annotated]
    assert [a.commonsense for a in loaded] == [a.commonsense for a in result.annotated]


def test_annotation_stale_hash_rejected(toy_corpus, mock_service, tmp_path):
    from emocause.corpus import DataError

    result = annotate_corpus(toy_corpus, mock_service, mock_service, mock_service)
    path = tmp_path / "annotated.jsonl"
    write_annotations(result.annotated, path)
    docs = list(toy_corpus.documents)
    docs[3] = Document(docs[3].doc_id,
                       docs[3].clauses[:-1] + (Clause(len(docs[3].clauses), "edited"),),
                       docs[3].gold_pairs, docs[3].emotion_label)
    with pytest.raises(DataError, match="stale"):
        read_annotations(Corpus(tuple(docs), toy_corpus.split_tag), path)
