"""Convolutional tagging of location words in short noisy texts."""
from .config import ModelConfig, flatten_size, read_config, write_config
from .corpus import (AnnotatedTweet, Corpus, Gazetteer, RawRecord, is_retweet_duplicate, load_corpus,
                     preprocess, save_corpus, synth_generate)
from .embedding import (EmbeddingMatrix, EncodedTweet, Vocabulary, build_lookup, build_vocab, embed,
                        encode, load_pretrained)
from .harness import CVResult, FoldPlan, SweepSpec, cross_validate, kfold_split, sweep
from .metrics import InstanceScores, MetricsReport, aggregate, score_instance
from .model_io import load_model, save_model
from .nn_core import Model, backward, forward, init_model, predict
from .training import AdamState, TrainLog, adam_step, bce_loss, grad_check, train

__version__ = "0.1.0"
