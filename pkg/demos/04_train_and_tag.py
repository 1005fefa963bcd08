"""Train a small tagger, save it, reload it and tag new sentences."""
import tempfile
from pathlib import Path

from geotag.config import ModelConfig
from geotag.corpus import preprocess, synth_generate
from geotag.embedding import build_vocab, encode_tokens
from geotag.harness import evaluate
from geotag.model_io import load_model, save_model
from geotag.nn_core import init_model
from geotag.synthdata import default_gazetteer, default_templates
from geotag.training import train

corpus = synth_generate(default_gazetteer(30), default_templates(10), 200, seed=1)
cfg = ModelConfig(m=20, K=16, feature_maps=16, batch_size=10, epochs=60, seed=0)
model, log = train(init_model(cfg, build_vocab(corpus)), corpus, cfg)
print(f"loss: epoch 1 {log.losses[0]:.3f} -> epoch {len(log)} {log.losses[-1]:.3f}")
print(evaluate(model, corpus).to_table("training set"))

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "tagger.bin"
    save_model(model, path)
    print(f"model file: {path.stat().st_size} bytes")
    model = load_model(path)

# 200 template sentences teach the sentence frames as much as the names, so
# the last example (an unseen frame) is often tagged wrongly
for text in ["Strong earthquake in Kathmandu Nepal", "Magnitude 6 quake hits #Tokyo and Lima",
             "felt it here in #Lima, anyone else?"]:
    tokens = preprocess(text)
    mask = model.tag(encode_tokens(tokens, model.vocab, cfg.m).indices)
    print(text, "->", [t for t, v in zip(tokens, mask) if v])
