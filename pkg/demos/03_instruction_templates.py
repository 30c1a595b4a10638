"""Rendering instruction records and reading model output back.

An instruction has four elements in order: task description, the
numbered document context, a knowledge preamble matching the knowledge
kind, and the serialized knowledge. The response side uses the pair
grammar "(e,c); (e,c)", and parsing tolerates the prose real models wrap
around their answers.
"""

from emocause import (
    MockModelService, annotate_corpus, default_template_config, parse_pairs,
    parse_pairs_detailed, render_instruction, render_response,
)
from emocause.data import load_toy_corpus

service = MockModelService()
config = default_template_config()
toy = load_toy_corpus(split_tag="train")
result = annotate_corpus(toy, service, service, service)

# One document per knowledge kind, rendered in full.
by_kind = {}
for annotated in result.annotated:
    by_kind.setdefault(annotated.knowledge.kind, annotated)

for kind, annotated in by_kind.items():
    record = render_instruction(annotated, config, split_tag="train")
    print(f"=== {kind} instruction ({record.record_id}) ===")
    print(record.instruction)
    print(f"--- gold response: {record.response}\n")

# The response grammar is canonical and sorted...
from emocause.corpus import Pair

print("render_response:", render_response({Pair(5, 5), Pair(3, 2)}))

# ...and parsing is tolerant: prose, full-width punctuation, duplicates.
for output in ("(3,2); (5,5)",
               "The pairs are (3, 2) and (5,5).",
               "答案：（3，2）",
               "no causal pairs found"):
    outcome = parse_pairs_detailed(output)
    print(f"parse({output!r}) -> {sorted(outcome.pairs)} "
          f"(no_match={outcome.no_match})")

# Round trip holds for any nonempty pair set.
pairs = frozenset({Pair(4, 1), Pair(2, 2), Pair(4, 3)})
assert parse_pairs(render_response(pairs)) == pairs
print("round trip: parse(render(S)) == S")
