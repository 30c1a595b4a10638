"""Building blended training sets at controlled mixing ratios.

Causal records are drawn from a general instruction pool by embedding
similarity to the ECPE records (round-robin best match, no replacement)
and shuffled in at N causal records per ECPE record. Selection is
deterministic, so sweeping ratios under one seed yields nested datasets:
the 1:1 selection sits inside 1:2, which sits inside 1:5.
"""

from collections import Counter

from emocause import (
    MixRatio, MockModelService, annotate_corpus, blend, default_template_config,
    render_instruction, select_causal, sweep,
)
from emocause.data import load_toy_causal, load_toy_corpus

service = MockModelService()
config = default_template_config()
toy = load_toy_corpus(split_tag="train")
annotated = annotate_corpus(toy, service, service, service).annotated
ecpe = [render_instruction(a, config, split_tag="train") for a in annotated]
pool = load_toy_causal()
print(f"{len(ecpe)} ECPE records, causal pool of {len(pool)}")

# Selection at 1:2 picks the 40 most similar pool records, spread
# round-robin across the ECPE records.
selected = select_causal(ecpe, pool, MixRatio(2), service)
print(f"\nratio 1:2 selected {len(selected)} causal records")
print("task tags of the selection:", dict(Counter(r.task_tag for r in selected)))

# Blending shuffles the union reproducibly.
dataset = blend(ecpe, selected, seed=7, ratio=MixRatio(2))
print(f"blend stats: {dataset.stats}")
print("first three records after the seeded shuffle:",
      [r.record_id for r in dataset.records[:3]])

# The standard sweep covers four ratios; selections nest under one seed.
datasets = sweep(ecpe, pool, [MixRatio(n) for n in (1, 2, 5, 10)], seed=7, embedder=service)
previous = set()
for ds in datasets:
    ids = {r.meta["causal_id"] for r in ds.records if r.source == "causal"}
    nested = "contains the previous selection" if previous <= ids else "NOT NESTED"
    shortfall = f", shortfall {ds.shortfall}" if ds.shortfall else ""
    print(f"ratio {ds.ratio}: {ds.stats['total']} records{shortfall} ({nested})")
    previous = ids
