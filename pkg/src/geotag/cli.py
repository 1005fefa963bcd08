"""Command-line interface: ``geotag <subcommand> ...`` or ``python -m geotag``.

Exit status: 0 on success, 1 on data or format errors, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .config import ModelConfig, read_config
from .embedding import build_lookup, build_vocab, encode_tokens, load_pretrained
from .errors import GeotagError
from .harness import (conv_depth_grid, cross_validate, dense_grid, evaluate, filter_grid,
                      stacked_filter_grid, parse_sweep_text, sweep)
from .model_io import load_model, save_model
from .nn_core import init_model
from .synthdata import FILLERS, default_gazetteer, default_templates
from .training import REFERENCE_GRADCHECK_CONFIG, grad_check, gradcheck_fixture, train

GRADCHECK_TOLERANCE = 1e-4


def _config(args, base: ModelConfig | None = None) -> ModelConfig:
    cfg = read_config(args.config, base) if getattr(args, "config", None) else (base or ModelConfig())
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def _write(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_synth(args) -> int:
    gaz = corpus_mod.load_gazetteer(args.gazetteer) if args.gazetteer else default_gazetteer()
    templates = corpus_mod.load_templates(args.templates) if args.templates else default_templates()
    fillers = FILLERS if (args.max_prefix or args.max_suffix) else ()
    corpus = corpus_mod.synth_generate(gaz, templates, args.n, args.seed, fillers=fillers,
                                       max_prefix=args.max_prefix, max_suffix=args.max_suffix)
    _write(corpus_mod.dump_corpus(corpus), args.out)
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    corpus = corpus_mod.load_corpus(args.corpus)
    vocab = build_vocab(corpus)
    pretrained = load_pretrained(args.embeddings, cfg.K, restrict_to=vocab) if args.embeddings else None
    lookup = build_lookup(vocab, pretrained, cfg.seed, K=cfg.K)
    logging.info("vocabulary %d words, %.1f%% from pretrained vectors", len(vocab), 100 * lookup.coverage)
    model, log = train(init_model(cfg, vocab, lookup), corpus, cfg)
    save_model(model, args.out)
    if args.log:
        Path(args.log).write_text(log.to_csv(), encoding="utf-8")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    report = evaluate(model, corpus_mod.load_corpus(args.corpus))
    _write(report.to_csv(), args.out)
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    source = sys.stdin if args.input in (None, "-") else open(args.input, encoding="utf-8")
    lines = []
    with source:
        for text in source:
            text = text.rstrip("\n")
            if not text.strip():
                continue
            tokens = corpus_mod.preprocess(text)
            record = {"text": text, "tokens": tokens, "locations": []}
            if tokens:
                mask = model.tag(encode_tokens(tokens, model.vocab, model.config.m).indices)
                record["locations"] = [{"index": i, "token": tok}
                                       for i, tok in enumerate(tokens[:model.config.m]) if mask[i]]
            lines.append(json.dumps(record, ensure_ascii=False) + "\n")
    _write("".join(lines), args.out)
    return 0


def cmd_cv(args) -> int:
    cfg = _config(args)
    corpus = corpus_mod.load_corpus(args.corpus)
    result = cross_validate(corpus, cfg, args.embeddings, k=args.k, seed=args.seed,
                            paper_vocab=args.paper_vocab, workers=args.workers)
    _write(result.to_csv(), args.out)
    return 0


_GRIDS = {"filters": filter_grid, "stacked-filters": stacked_filter_grid,
          "dense": dense_grid, "conv": conv_depth_grid}


def cmd_sweep(args) -> int:
    base = _config(args)
    if args.spec:
        spec = parse_sweep_text(Path(args.spec).read_text(encoding="utf-8"), base)
    else:
        spec = _GRIDS[args.grid](base)
    corpus = corpus_mod.load_corpus(args.corpus)
    result = sweep(corpus, spec, args.embeddings, k=args.k, seed=args.seed,
                   paper_vocab=args.paper_vocab, workers=args.workers)
    _write(result.to_csv(), args.out)
    if args.table:
        sys.stderr.write(result.to_table())
    return 0


def cmd_gradcheck(args) -> int:
    cfg = _config(args, REFERENCE_GRADCHECK_CONFIG).with_(dropout=0.0)
    model, example = gradcheck_fixture(cfg, args.seed)
    report = {}
    err = grad_check(model, example, args.eps, report=report)
    for name, value in report.items():
        logging.info("%-14s %.3e", name, value)
    print(f"max relative error {err:.3e}")
    return 0 if err < args.tolerance else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geotag", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def seeded(p, required=True):
        p.add_argument("--seed", type=int, required=required, help="controls all randomness")

    p = sub.add_parser("synth", help="generate a synthetic annotated corpus (JSONL)")
    p.add_argument("--gazetteer", help="one place name per line (default: built-in)")
    p.add_argument("--templates", help="one template per line, slots written {LOC}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-prefix", type=int, default=0, help="random filler words before each tweet")
    p.add_argument("--max-suffix", type=int, default=0, help="random filler words after each tweet")
    p.add_argument("--out")
    seeded(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and write the model file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", help="pretrained 'token v1 .. vK' text file")
    p.add_argument("--config", help="key = value file of ModelConfig fields")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--log", help="training log CSV (epoch, mean_loss, seconds)")
    seeded(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model on an annotated corpus (metrics CSV)")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    seeded(p, required=False)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="tag raw text lines; JSONL output")
    p.add_argument("--model", required=True)
    p.add_argument("--input", help="text file, one tweet per line (default stdin)")
    p.add_argument("--out")
    seeded(p, required=False)
    p.set_defaults(func=cmd_predict)

    for name, func, helptext in (("cv", cmd_cv, "k-fold cross-validation (fold reports CSV)"),
                                 ("sweep", cmd_sweep, "cross-validate a grid of variants")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--corpus", required=True)
        p.add_argument("--config")
        p.add_argument("--embeddings")
        p.add_argument("--k", type=int, default=10)
        p.add_argument("--paper-vocab", action="store_true",
                       help="one vocabulary from the whole corpus instead of per training split")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out")
        seeded(p)
        p.set_defaults(func=func)
        if name == "sweep":
            group = p.add_mutually_exclusive_group(required=True)
            group.add_argument("--spec", help="sweep file; '|' separates alternative values")
            group.add_argument("--grid", choices=sorted(_GRIDS))
            p.add_argument("--table", action="store_true", help="also print a table to stderr")

    p = sub.add_parser("gradcheck", help="compare analytic and finite-difference gradients")
    p.add_argument("--config", help="defaults to the small reference model")
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tolerance", type=float, default=GRADCHECK_TOLERANCE)
    seeded(p)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (GeotagError, OSError, ValueError) as exc:
        print(f"geotag {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
