"""Scoring predictions with pair-level precision/recall/F1.

A predicted pair counts only on exact (emotion clause, cause clause)
match; counts are micro-averaged over the corpus. The report keeps the
anomalies visible: out-of-range pairs are filtered but counted,
duplicates collapse to one, and unparseable outputs are flagged rather
than failed.
"""

import random

from emocause import MockModelService, compare_runs, evaluate_run, match_pairs, prf1
from emocause.corpus import Pair
from emocause.data import load_toy_corpus
from emocause.template import render_response

toy = load_toy_corpus(split_tag="test")
service = MockModelService()

# Counting by hand: gold {(3,2),(5,5)} vs four proposals, two of them right.
counts = match_pairs(frozenset({Pair(3, 2), Pair(5, 5)}),
                     frozenset({Pair(3, 2), Pair(4, 1), Pair(5, 5), Pair(5, 4)}))
print(f"counts: correct={counts.correct} proposed={counts.proposed} gold={counts.gold}")
print(f"metrics: {prf1(counts)}")

# Run 1: the mock completion echoes gold, so every metric is 1.0.
gold_predictions = {doc.doc_id: service.complete(f"Document {doc.doc_id}: ...")
                    for doc in toy}
gold_report = evaluate_run(toy, gold_predictions, run_id="gold-echo")
print("\n" + gold_report.render_text())

# Run 2: a sloppier model wraps answers in prose and sometimes invents
# out-of-range pairs or forgets a document entirely.
rng = random.Random(3)
noisy_predictions = {}
for doc in toy.documents[:-1]:  # drop one document from the file
    answer = render_response(doc.gold_pairs)
    if rng.random() < 0.4:
        answer = f"I think the answer is {answer} and also (99,1)."
    if rng.random() < 0.3:
        answer = "there are no pairs here"
    noisy_predictions[doc.doc_id] = answer
noisy_report = evaluate_run(toy, noisy_predictions, run_id="noisy")
print(noisy_report.render_text())

# Compare the runs: rows sorted by F1, best marked.
table = compare_runs([gold_report, noisy_report])
print(table.render_text())
