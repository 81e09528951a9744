"""Command-line entry point wiring the full pipeline.

Subcommands: augment, train, eval, project, translit, gradcheck, sweep.
One --seed flag drives every random stream: parameter init uses seed,
shuffling seed+1, synthetic corpus generation seed+2.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .augment import DictionaryTranslator, build_triplets, read_corpus, read_triplets, write_triplets
from .encoder import EncoderConfig, load_checkpoint, save_checkpoint
from .errors import TranslignError
from .evaluation import freeze_sweep, project_triplets, write_sweep
from .gradcheck import run_battery
from .metrics import evaluate_variant
from .synthetic import generate_corpus, generate_task, make_cipher_key, make_lexicon
from .trainer import TrainConfig, parse_config, train, write_history
from .translit import cipher_table, load_table, transliterate


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve_config(args) -> TrainConfig:
    cfg = parse_config(args.config) if args.config else TrainConfig()
    if getattr(args, "mode", None):
        cfg = replace(cfg, mode=args.mode)
    if getattr(args, "alpha", None) is not None:
        cfg = replace(cfg, loss_weights=replace(cfg.loss_weights, alpha=args.alpha))
    if getattr(args, "freeze_depth", None) is not None:
        cfg = replace(cfg, freeze_depth=args.freeze_depth)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    _log(f"resolved config: {cfg}")
    return cfg


def _encoder_config(cfg: TrainConfig) -> EncoderConfig:
    return EncoderConfig(freeze_depth=cfg.freeze_depth)


def _cmd_augment(args) -> int:
    if args.synthetic:
        seed = (args.seed or 0) + 2  # documented stream split
        task = generate_task(seed)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for split, triplets in (("train", task.train), ("val", task.val), ("test", task.test)):
            path = out_dir / f"{split}.jsonl"
            write_triplets(path, triplets)
            _log(f"wrote {len(triplets)} triplets to {path}")
        return 0
    corpus = read_corpus(args.infile)
    with open(args.lexicon, encoding="utf-8") as f:
        translator = DictionaryTranslator(json.load(f))
    table = load_table(args.table)
    write_triplets(args.out, build_triplets(corpus, translator, table))
    _log(f"wrote {len(corpus)} triplets to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _resolve_config(args)
    train_triplets = read_triplets(args.train)
    val_triplets = read_triplets(args.val)
    result = train(train_triplets, val_triplets, cfg, _encoder_config(cfg))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out_dir / "checkpoint.json", result.best_params, result.tokenizer)
    write_history(out_dir / "history.jsonl", result.history)
    if result.teacher is not None:
        save_checkpoint(out_dir / "teacher.json", result.teacher, result.tokenizer)
    _log(
        f"trained mode={cfg.mode}: best epoch {result.best_epoch} "
        f"(val weighted F1 {result.history[result.best_epoch - 1].val_weighted_f1:.4f}), "
        f"stopped at epoch {result.stopped_epoch}"
    )
    return 0


def _cmd_eval(args) -> int:
    params, spec = load_checkpoint(args.checkpoint)
    triplets = read_triplets(args.test)
    report = evaluate_variant(params, spec, triplets, args.variant)
    doc = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(doc + "\n", encoding="utf-8")
    print(doc)
    return 0


def _cmd_project(args) -> int:
    params, spec = load_checkpoint(args.checkpoint)
    triplets = read_triplets(args.infile)
    rows = project_triplets(params, spec, triplets)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("x,y,tag\n")
        for x, y, tag in rows:
            f.write(f"{x!r},{y!r},{tag}\n")
    _log(f"wrote {len(rows)} projected points to {args.out}")
    return 0


def _cmd_translit(args) -> int:
    table = load_table(args.table, final_schwa_deletion=args.final_schwa_deletion)
    unmapped = 0
    with open(args.infile, encoding="utf-8") as fin, open(args.out, "w", encoding="utf-8") as fout:
        for line in fin:
            result = transliterate(line.rstrip("\n"), table)
            unmapped += result.unmapped_count
            fout.write(result.output + "\n")
    _log(f"transliterated {args.infile} -> {args.out} ({unmapped} unmapped codepoints)")
    return 0


def _cmd_gradcheck(args) -> int:
    reports = run_battery(seed=args.seed or 0, instances=args.instances)
    ok = True
    for r in reports:
        print(r.line())
        ok &= r.passed
    print("gradient check:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def _cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    enc_cfg = _encoder_config(cfg)
    k_values = [int(k) for k in args.k.split(",")]
    rows = freeze_sweep(
        read_triplets(args.train),
        read_triplets(args.val),
        read_triplets(args.test),
        cfg,
        k_values,
        enc_cfg,
    )
    write_sweep(args.out, rows)
    for row in rows:
        print(json.dumps(row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="translign",
        description="Teacher-student alignment training for transliterated-text transfer",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="build 3-way parallel triplets from a corpus")
    p.add_argument("--in", dest="infile", help="corpus JSONL (id, text, label)")
    p.add_argument("--lexicon", help="JSON dict of source word -> target word")
    p.add_argument("--table", help="transliteration rule table (TSV)")
    p.add_argument("--out", required=True, help="output triplet JSONL (or directory with --synthetic)")
    p.add_argument("--synthetic", action="store_true", help="emit the bundled synthetic task splits")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("train", help="train a model on triplet JSONL files")
    p.add_argument("--config", help="flat key = value training config")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=["en", "tr", "tl", "en+tr+tl", "joint", "joint_ts"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--freeze-depth", dest="freeze_depth", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a test triplet file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--variant", choices=["src", "tr", "tl"], default="tl")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("project", help="export 2-D PCA projection of CLS vectors as CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("translit", help="transliterate a text file line by line")
    p.add_argument("--table", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--final-schwa-deletion", action="store_true")
    p.set_defaults(func=_cmd_translit)

    p = sub.add_parser("gradcheck", help="finite-difference check of all primitives")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=20)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("sweep", help="train once per freeze depth and report test F1")
    p.add_argument("--config", help="flat key = value training config")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--k", required=True, help="comma-separated freeze depths, e.g. 0,1,2")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["en", "tr", "tl", "en+tr+tl", "joint", "joint_ts"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as e:
        _log(f"error: file not found: {e.filename}")
        return 2
    except TranslignError as e:
        _log(f"error: {e}")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
