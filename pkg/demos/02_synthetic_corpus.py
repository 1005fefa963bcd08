"""Build a labeled training corpus from place names and sentence templates.

No annotated tweet collection ships with the package, so experiments run on
corpora sampled from a gazetteer and templates with "{LOC}" slots.
"""
from collections import Counter

from geotag.corpus import Gazetteer, synth_generate
from geotag.synthdata import default_gazetteer, default_templates, desk_corpus

gaz = Gazetteer((("kathmandu", "nepal"), ("lima",), ("san", "jose", "costa", "rica")))
templates = ["strong earthquake in {LOC}", "shaking from {LOC} to {LOC}", "no damage here"]
for ex in synth_generate(gaz, templates, 5, seed=3):
    print(" ".join(f"[{t}]" if v else t for t, v in zip(ex.tokens, ex.mask)))

print(f"\nbuilt-in lists: {len(default_gazetteer())} places, {len(default_templates())} templates")

# the desk-scale corpus adds random filler words around each sentence so that
# locations do not always sit at the same positions
corpus = desk_corpus(1000, seed=0)
spread = Counter(sum(ex.mask) for ex in corpus)
print("location words per tweet:", dict(sorted(spread.items())))
print("longest tweet:", max(len(ex) for ex in corpus), "tokens")
