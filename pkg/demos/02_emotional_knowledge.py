"""Attaching emotional knowledge to documents.

Each document gets exactly one of two knowledge kinds. When the
commonsense generator produces a usable reaction, the seven emotion
labels are ranked against it by cosine similarity (a distribution). When
the reaction is "none", a coarse POSITIVE/NEGATIVE polarity verdict
stands in. The bundled mock service makes the whole stage run offline
and deterministically.
"""

from emocause import MockModelService, annotate_corpus, cosine, score_labels
from emocause.data import load_toy_corpus

service = MockModelService(none_fraction=0.43, embed_dim=64)

# The generator answers with a short reaction phrase, or "none".
for text in ("the bridge creaked under the truck",
             "Maya read the letter twice",
             "a quiet afternoon"):
    print(f"reaction({text!r}) = {service.generate_reaction(text)!r}")

# Rank the seven labels against a reaction. Identical text embeds to an
# identical vector, so a label used as the reaction ranks first with 1.0.
dist = score_labels("happiness", service)
print(f"\ntop label for reaction 'happiness': {dist.entries[0]}")

dist = score_labels("scared", service)
print("ranking for reaction 'scared':")
for label, score in dist.entries:
    print(f"  {label}: {score:.4f}")

# Cosine is the similarity primitive under the ranking.
u, v = service.embed(["scared", "fear"])
print(f"\ncosine('scared', 'fear') = {cosine(u, v):.4f}")

# Annotating a corpus dispatches per document and reports the none rate.
toy = load_toy_corpus()
result = annotate_corpus(toy, service, service, service, max_workers=4)
print(f"\nannotated {result.stats.total} docs; none rate = {result.stats.none_rate:.2f}")
for annotated in result.annotated[:4]:
    knowledge = annotated.knowledge
    if knowledge.kind == "distribution":
        detail = f"top label {knowledge.distribution.top_label()!r}"
    else:
        detail = f"polarity {knowledge.polarity.label}"
    print(f"  {annotated.document.doc_id}: reaction {annotated.commonsense.reaction!r} "
          f"-> {knowledge.kind} ({detail})")
