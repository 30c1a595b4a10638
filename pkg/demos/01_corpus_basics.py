"""Parsing, validating, and splitting an emotion-cause corpus.

Documents arrive pre-segmented into clauses; gold annotations name the
clause that expresses an emotion and the clause that states its cause,
both by 1-based index.
"""

from emocause import parse_corpus, emit_corpus, split_corpus, validate_corpus
from emocause.data import load_toy_corpus

# The canonical format is one JSON record per line.
raw = (
    '{"doc_id":"ex1","clauses":["The rain finally stopped",'
    '"the children ran outside cheering"],"pairs":[[2,1]]}\n'
)
corpus = parse_corpus(raw)
doc = corpus.documents[0]
print(f"parsed {doc.doc_id}: {doc.clause_count} clauses, gold pairs {sorted(doc.gold_pairs)}")

# Emitting and reparsing is the identity.
assert parse_corpus(emit_corpus(corpus)) == corpus
print("round trip: parse(emit(corpus)) == corpus")

# The bundled toy corpus: 20 small English documents, fully annotated.
toy = load_toy_corpus()
print(f"\ntoy corpus: {len(toy)} documents, {sum(d.clause_count for d in toy)} clauses")
print(f"violations: {validate_corpus(toy)}")

multi = [d.doc_id for d in toy if len(d.gold_pairs) > 1]
print(f"documents with multiple gold pairs: {multi}")

# Splits are seeded and reproducible: same seed, same partition.
train, test = split_corpus(toy, test_fraction=0.2, seed=13)
train2, test2 = split_corpus(toy, test_fraction=0.2, seed=13)
assert [d.doc_id for d in test] == [d.doc_id for d in test2]
print(f"\nsplit with seed 13: {len(train)} train / {len(test)} test")
print(f"test docs: {[d.doc_id for d in test]}")

# A legacy tabular reader covers NTCIR-style exports.
legacy = """\
sample 2
(1,2)
1,happiness,She laughed until she cried
2,null,the puppy chased its own tail off the porch
"""
legacy_corpus = parse_corpus(legacy, format="legacy-tabular")
print(f"\nlegacy format: parsed {legacy_corpus.documents[0].doc_id} with "
      f"label {legacy_corpus.documents[0].emotion_label!r}")
