"""One forward pass through the tagger, then a finite-difference gradient check.

The network embeds each word, runs one convolution stack per filter width,
max-pools, flattens, passes through dense layers and emits one sigmoid
probability per position.
"""
import numpy as np

from geotag.config import ModelConfig, flatten_size
from geotag.corpus import AnnotatedTweet
from geotag.embedding import build_vocab, encode
from geotag.nn_core import forward, init_model, param_shapes
from geotag.training import grad_check, gradcheck_fixture

print("flatten size for the default architecture:", flatten_size(ModelConfig()))

cfg = ModelConfig(m=12, K=8, filter_widths=(2, 3), feature_maps=4, dense_hidden=10, seed=0)
tweet = AnnotatedTweet(("quake", "hits", "kathmandu", "nepal"), (0, 0, 1, 1))
vocab = build_vocab([tweet])
model = init_model(cfg, vocab)
for name, shape in param_shapes(cfg, len(vocab)).items():
    print(f"  {name:12s} {shape}")

enc = encode(tweet, vocab, cfg.m)
probs, _ = forward(model, enc)
print("untrained probabilities:", np.round(probs, 3))

model, example = gradcheck_fixture()
report = {}
worst = grad_check(model, example, eps=1e-5, report=report)
for name, err in report.items():
    print(f"  {name:12s} {err:.1e}")
print(f"largest relative error {worst:.1e} (must stay below 1e-4)")
