"""Command line: ``gausset {train,expand,eval,synth}``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import config as cfgmod
from .embeddings import EmbeddingFormatError, load_embeddings_file, resolve_seed, save_embeddings
from .encoder import CheckpointError, load_params_file
from .evaluation import evaluate
from .expander import (SCORERS, dump_ground_truth, expand, expand_centroid, load_ground_truth,
                       write_ranking)
from .synthetic import gen_synthetic
from .trainer import TrainConfig, TrainingDivergedError, train_on_occurrences
from .weak import extract_contexts

EXIT_USAGE = 1
EXIT_DATA = 2

log = logging.getLogger("gausset")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_embedding_args(p):
    p.add_argument("--config", help="YAML/JSON settings file")
    p.add_argument("--embeddings", help="GloVe-style text embedding file")
    p.add_argument("--max-terms", type=int, help="keep the first N vocabulary rows")
    p.add_argument("--dim", type=int, help="assert the embedding dimension")


def _add_train_args(p):
    p.add_argument("--corpus", help="one whitespace-tokenised document per line")
    p.add_argument("--lr", type=float, dest="learning_rate")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--margin", type=float)
    p.add_argument("--pairs", type=int, help="training pair budget")
    p.add_argument("--rng-seed", type=int)
    p.add_argument("--optimizer", choices=("adam", "sgd"))
    p.add_argument("--window", type=int)
    p.add_argument("--labeler", choices=("max", "centroid"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gausset", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit an encoder for one seed set")
    _add_embedding_args(p)
    _add_train_args(p)
    p.add_argument("--seed", required=True, help="comma-separated seed terms")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--report", help="training report JSON path (default: OUT.json)")

    p = sub.add_parser("expand", help="rank the vocabulary for a seed set")
    _add_embedding_args(p)
    p.add_argument("--seed", required=True, help="comma-separated seed terms")
    p.add_argument("--k", type=int, default=200)
    p.add_argument("--scorer", choices=SCORERS, default="gauss")
    p.add_argument("--checkpoint", help="encoder checkpoint (gauss scorer)")
    p.add_argument("--out", help="ranking file (default: stdout)")

    p = sub.add_parser("eval", help="MAP@k over ground-truth classes")
    _add_embedding_args(p)
    _add_train_args(p)
    p.add_argument("--gt", required=True, help="JSON {class: [members]}")
    p.add_argument("--runs", type=int, default=3, help="seed draws per class")
    p.add_argument("--seed-size", type=int, default=3)
    p.add_argument("--k", type=int, help="cutoff (default 200, or 350 for classes > 100)")
    p.add_argument("--scorer", choices=SCORERS + ("both",), default="both")
    p.add_argument("--eval-seed", type=int, default=0, help="RNG seed for seed-set draws")
    p.add_argument("--json", dest="json_out", help="also write results JSON here")

    p = sub.add_parser("synth", help="write a synthetic benchmark")
    p.add_argument("--classes", type=int, default=8)
    p.add_argument("--per-class", type=int, default=30)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--intra", type=float, default=0.1)
    p.add_argument("--inter", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _pick(flag, cfg, key):
    return flag if flag is not None else cfgmod.get(cfg, key)


def _load_store(args, cfg):
    path = _pick(args.embeddings, cfg, "embeddings.path")
    if path is None:
        raise UsageError("no embeddings given (--embeddings or embeddings.path)")
    store = load_embeddings_file(path, max_terms=_pick(args.max_terms, cfg, "embeddings.max_terms"),
                                 dim=_pick(args.dim, cfg, "embeddings.dim"))
    enc_dim = cfgmod.get(cfg, "encoder.dim")
    if enc_dim is not None and enc_dim != store.dim:
        raise EmbeddingFormatError(f"encoder.dim={enc_dim} but embeddings have dimension {store.dim}")
    return store


def _train_config(args, cfg) -> TrainConfig:
    return TrainConfig(
        learning_rate=_pick(args.learning_rate, cfg, "train.learning_rate"),
        batch_size=_pick(args.batch_size, cfg, "train.batch_size"),
        hidden=_pick(args.hidden, cfg, "encoder.hidden"),
        margin=_pick(args.margin, cfg, "loss.margin"),
        pairs=_pick(args.pairs, cfg, "weak.pairs"),
        rng_seed=_pick(args.rng_seed, cfg, "train.rng_seed"),
        optimizer=_pick(args.optimizer, cfg, "train.optimizer"),
        window=_pick(args.window, cfg, "weak.window"),
        labeler=_pick(args.labeler, cfg, "weak.labeler"),
    )


def _occurrences(args, cfg, store, window):
    path = _pick(args.corpus, cfg, "corpus.path")
    if path is None:
        raise UsageError("no corpus given (--corpus or corpus.path)")
    with open(path, encoding="utf-8") as f:
        return list(extract_contexts(f, store, window))


def _seed_terms(text: str) -> list[str]:
    terms = [t.strip() for t in text.split(",") if t.strip()]
    if not terms:
        raise UsageError("--seed needs at least one term")
    return terms


def cmd_train(args, cfg) -> int:
    store = _load_store(args, cfg)
    tc = _train_config(args, cfg)
    seed = resolve_seed(store, _seed_terms(args.seed))
    occurrences = _occurrences(args, cfg, store, tc.window)
    _, report = train_on_occurrences(store, occurrences, seed, tc, checkpoint=args.out)
    report_path = args.report or args.out + ".json"
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=1)
    log.info("wrote %s and %s", args.out, report_path)
    return 0


def cmd_expand(args, cfg) -> int:
    if args.k < 1:
        raise UsageError("--k must be positive")
    store = _load_store(args, cfg)
    seed = resolve_seed(store, _seed_terms(args.seed))
    if args.scorer == "gauss":
        if not args.checkpoint:
            raise UsageError("--scorer gauss needs --checkpoint")
        params = load_params_file(args.checkpoint)
        if params.dim != store.dim:
            raise CheckpointError(f"checkpoint dimension {params.dim} != embeddings {store.dim}")
        ranking = expand(params, store, seed, args.k)
    else:
        ranking = expand_centroid(store, seed, args.k)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            write_ranking(ranking, f)
    else:
        write_ranking(ranking, sys.stdout)
    return 0


def cmd_eval(args, cfg) -> int:
    if args.runs < 1 or args.seed_size < 1 or (args.k is not None and args.k < 1):
        raise UsageError("--runs, --seed-size and --k must be positive")
    store = _load_store(args, cfg)
    tc = _train_config(args, cfg)
    with open(args.gt, encoding="utf-8") as f:
        classes = load_ground_truth(f)
    scorers = SCORERS if args.scorer == "both" else (args.scorer,)
    occurrences = _occurrences(args, cfg, store, tc.window) if "gauss" in scorers else []
    result = evaluate(store, occurrences, classes, tc, draws=args.runs, seed_size=args.seed_size,
                      k=args.k, scorers=scorers, rng_seed=args.eval_seed)
    print(result.table())
    payload = json.dumps(result.to_dict(), indent=1)
    print(payload)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as f:
            f.write(payload + "\n")
    return 0


def cmd_synth(args, cfg) -> int:
    bench = gen_synthetic(args.classes, args.per_class, args.dim, args.intra, args.inter,
                          rng_seed=args.seed, noise=args.noise)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "embeddings.txt"), "w", encoding="utf-8") as f:
        save_embeddings(bench.store, f)
    with open(os.path.join(args.out, "corpus.txt"), "w", encoding="utf-8") as f:
        f.writelines(doc + "\n" for doc in bench.corpus)
    with open(os.path.join(args.out, "gt.json"), "w", encoding="utf-8") as f:
        dump_ground_truth(bench.classes, f)
    log.info("wrote synthetic benchmark to %s", args.out)
    return 0


COMMANDS = {"train": cmd_train, "expand": cmd_expand, "eval": cmd_eval, "synth": cmd_synth}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load_config(getattr(args, "config", None))
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gausset: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, LookupError, ValueError, EmbeddingFormatError, CheckpointError,
            TrainingDivergedError, cfgmod.ConfigError) as exc:
        print(f"gausset: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
