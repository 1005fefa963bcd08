"""Cross-validate the tagger and compare filter-width choices.

Each fold gets its own vocabulary built from its training split only, so
words that appear only in held-out tweets are unknown to the model. This
takes a few minutes.
"""
from geotag.config import ModelConfig
from geotag.harness import SweepSpec, cross_validate, sweep
from geotag.synthdata import desk_corpus

corpus = desk_corpus(500, seed=0)
cfg = ModelConfig(m=30, K=16, feature_maps=16, batch_size=10, epochs=20, seed=0)

result = cross_validate(corpus, cfg, k=5)
for fold in result.folds:
    print(f"fold {fold.fold}: F1 {fold.report.f1:.3f}, {len(fold.vocabulary)} words in vocabulary")
print(result.mean.to_table("mean over folds"))

spec = SweepSpec([(f"widths {h}", cfg.with_(filter_widths=(h,))) for h in (2, 5)]
                 + [("widths 2,3,4", cfg)])
print(sweep(corpus, spec, k=5).to_table())
