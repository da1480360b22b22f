"""Command-line entry point wiring the toolkit into workflows."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass

from . import __version__
from .candidates import WindowConfig
from .closure import close, equivalence_aware_report
from .core import RelationLabel, TdpError
from .corpus import (
    CorpusFormatError,
    corpus_stats,
    load_corpus,
    load_documents,
    save_corpus,
)
from .decoder import cycle_skip_rate, decode, parse_documents
from .encoders import EncoderConfig, EncoderVariant, Vocabulary
from .evaluation import evaluate
from .ranking import table_from_scores
from .training import (
    DEFAULT_EPOCH_GRID,
    DEFAULT_GRID_RUNS,
    DEFAULT_LEARNING_RATES,
    TrainConfig,
    build_model,
    grid_search,
    load_checkpoint,
    save_checkpoint,
    train,
)


@dataclass(frozen=True)
class RunManifest:
    """Record of one CLI run, written alongside its outputs."""

    command: str
    config: dict
    inputs: list[str]
    outputs: list[str]
    seed: int | None
    version: str
    duration_seconds: float
    metrics: dict


def _write_manifest(path: str, manifest: RunManifest) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(asdict(manifest), handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_jsonl(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def _window(args: argparse.Namespace) -> WindowConfig:
    return WindowConfig(back=args.window_back, forward=args.window_forward)


def _add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window-back", type=int, default=10, metavar="K")
    parser.add_argument("--window-forward", type=int, default=3, metavar="M")


def _comma_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _comma_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def cmd_stats(args: argparse.Namespace) -> int:
    records = load_corpus(args.corpus, strict=not args.lenient)
    stats = corpus_stats(records, _window(args))
    if args.json:
        print(json.dumps(stats.as_dict(), indent=2, sort_keys=True))
        return 0
    for key, value in stats.as_dict().items():
        print(f"{key}: {value}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    records = load_corpus(args.corpus, strict=True)
    print(f"ok: {len(records)} documents")
    return 0


def _encoder_config(args: argparse.Namespace) -> EncoderConfig:
    return EncoderConfig(
        variant=args.encoder,
        embedding_dim=args.embedding_dim,
        recurrent_hidden_dim=args.hidden_dim,
        contextual_model_name=args.checkpoint,
        static_vectors_path=args.vectors,
    )


def cmd_train(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    train_records = load_corpus(args.train, strict=not args.lenient)
    dev_records = load_corpus(args.dev, strict=not args.lenient) if args.dev else []
    window = _window(args)
    encoder_config = _encoder_config(args)
    vocab = Vocabulary.from_documents([doc for doc, _ in train_records])
    outputs = [args.out, f"{args.out}.trace.jsonl"]
    metrics: dict = {}

    if args.grid:
        learning_rates = _comma_floats(args.lr) if args.lr else DEFAULT_LEARNING_RATES
        epoch_grid = _comma_ints(args.epochs) if args.epochs else DEFAULT_EPOCH_GRID
        runs = args.runs if args.runs is not None else DEFAULT_GRID_RUNS
        base = TrainConfig(seed=args.seed, batch_size=args.batch_size, runs=runs)
        grid = grid_search(
            train_records,
            dev_records,
            encoder_config,
            base,
            learning_rates,
            epoch_grid,
            window,
        )
        grid_path = f"{args.out}.grid.json"
        with open(grid_path, "w", encoding="utf-8") as handle:
            json.dump(grid.as_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")
        outputs.append(grid_path)
        best = grid.best
        config = TrainConfig(
            learning_rate=best.learning_rate,
            epochs=best.epochs,
            batch_size=args.batch_size,
            seed=args.seed,
            select_best_dev=args.select_best_dev,
        )
        metrics["grid_best"] = best.as_dict()
    else:
        config = TrainConfig(
            learning_rate=float(args.lr) if args.lr else 0.001,
            epochs=int(args.epochs) if args.epochs else 50,
            runs=args.runs if args.runs is not None else 1,
            batch_size=args.batch_size,
            seed=args.seed,
            select_best_dev=args.select_best_dev,
            stop_at_dev_f1=args.stop_at_dev_f1,
        )

    model = build_model(encoder_config, window, vocab, seed=config.seed)
    result = train(model, train_records, dev_records, config, window)
    save_checkpoint(args.out, model)
    _write_jsonl(f"{args.out}.trace.jsonl", (m.as_dict() for m in result.trace))
    selected = result.selected_metrics
    metrics.update(
        {
            "selected_epoch": result.selected_epoch,
            "dev_f1": selected.dev_f1,
            "train_loss": selected.train_loss,
        }
    )
    manifest = RunManifest(
        command="train",
        config={
            "encoder": encoder_config.to_dict(),
            "window": {"back": window.back, "forward": window.forward},
            "train": asdict(config),
        },
        inputs=[args.train] + ([args.dev] if args.dev else []),
        outputs=outputs,
        seed=args.seed,
        version=__version__,
        duration_seconds=time.perf_counter() - started,
        metrics=metrics,
    )
    _write_manifest(f"{args.out}.manifest.json", manifest)
    print(f"saved {args.out} (epoch {result.selected_epoch}, dev F1 {selected.dev_f1:.4f})")
    return 0


def _load_injected_tables(path: str) -> dict[str, list]:
    """Read a JSONL file of externally supplied score tables per document."""
    tables: dict[str, list] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as err:
                raise CorpusFormatError(f"{where}: not valid JSON: {err}") from None
            if not isinstance(raw, dict) or "doc_id" not in raw or "tables" not in raw:
                raise CorpusFormatError(f"{where}: need doc_id and tables fields")
            doc_tables = []
            for raw_table in raw["tables"]:
                try:
                    rows = [
                        (r["parent"], RelationLabel(r["label"]), float(r["score"]))
                        for r in raw_table["rows"]
                    ]
                    doc_tables.append(table_from_scores(raw_table["child"], rows))
                except (KeyError, TypeError, ValueError) as err:
                    raise CorpusFormatError(f"{where}: bad score table: {err}") from None
            tables[raw["doc_id"]] = doc_tables
    return tables


def cmd_parse(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    docs = load_documents(args.input, strict=not args.lenient)
    inputs = [args.input]

    if args.inject_scores:
        inputs.append(args.inject_scores)
        injected = _load_injected_tables(args.inject_scores)
        results = []
        for doc in docs:
            if doc.doc_id not in injected:
                raise CorpusFormatError(
                    f"{args.inject_scores}: no score tables for document {doc.doc_id}"
                )
            results.append(decode(doc, injected[doc.doc_id]))
        window = None
        model_config: dict = {"inject_scores": args.inject_scores}
    else:
        inputs.append(args.checkpoint)
        model, encoder_config, window = load_checkpoint(args.checkpoint)
        results = parse_documents(model, docs, window, jobs=args.jobs)
        model_config = {
            "checkpoint": args.checkpoint,
            "encoder": encoder_config.to_dict(),
            "window": {"back": window.back, "forward": window.forward},
        }

    trees = [tree for tree, _ in results]
    traces = [trace for _, trace in results]
    save_corpus(list(zip(docs, trees)), args.out)
    outputs = [args.out]
    if args.traces:
        _write_jsonl(
            args.traces,
            (
                {
                    "doc_id": trace.doc_id,
                    "cycle_skip_fraction": trace.cycle_skip_fraction,
                    "decisions": [
                        {
                            "child": d.child,
                            "parent": d.parent,
                            "label": d.label.value,
                            "probability": d.probability,
                            "skipped": d.skipped,
                        }
                        for d in trace.decisions
                    ],
                }
                for trace in traces
            ),
        )
        outputs.append(args.traces)

    total_children = sum(len(trace.decisions) for trace in traces)
    rate = cycle_skip_rate(traces) if total_children else None
    manifest = RunManifest(
        command="parse",
        config=model_config,
        inputs=inputs,
        outputs=outputs,
        seed=None,
        version=__version__,
        duration_seconds=time.perf_counter() - started,
        metrics={"documents": len(docs), "cycle_skip_rate": rate},
    )
    _write_manifest(f"{args.out}.manifest.json", manifest)
    return 0


def _format_ratio(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    pred_records = load_corpus(args.pred, strict=True)
    gold_records = load_corpus(args.gold, strict=True)
    predicted = [tree for _, tree in pred_records]
    gold = [tree for _, tree in gold_records]
    docs = [doc for doc, _ in gold_records]
    report = evaluate(predicted, gold, docs)
    equivalence = equivalence_aware_report(predicted, gold)

    print(f"documents: {len(docs)}")
    print(f"labeled f1: {report.f1:.4f}")
    print(f"unlabeled f1: {report.unlabeled_f1:.4f}")
    print(f"accuracy: {report.accuracy:.4f}")
    print(f"f1 with dct edge: {report.f1_with_root_edge:.4f}")
    print("parent-category accuracy:")
    for category, accuracy in report.category_accuracy.items():
        counts = report.category_counts[category]
        print(
            f"  {category}: {_format_ratio(accuracy)} "
            f"({counts.correct}/{counts.total})"
        )
    print("equivalence:")
    for key, value in equivalence.as_dict().items():
        if key != "per_document":
            print(f"  {key}: {value}")

    if args.out:
        payload = {"eval": report.as_dict(), "equivalence": equivalence.as_dict()}
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        manifest = RunManifest(
            command="eval",
            config={},
            inputs=[args.pred, args.gold],
            outputs=[args.out],
            seed=None,
            version=__version__,
            duration_seconds=time.perf_counter() - started,
            metrics={"f1": report.f1, "accuracy": report.accuracy},
        )
        _write_manifest(f"{args.out}.manifest.json", manifest)
    return 0


def cmd_closure(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    records = load_corpus(args.input, strict=not args.lenient)
    _write_jsonl(
        args.out,
        (
            {"doc_id": doc.doc_id, **close(tree).as_dict()}
            for doc, tree in records
        ),
    )
    manifest = RunManifest(
        command="closure",
        config={},
        inputs=[args.input],
        outputs=[args.out],
        seed=None,
        version=__version__,
        duration_seconds=time.perf_counter() - started,
        metrics={"documents": len(records)},
    )
    _write_manifest(f"{args.out}.manifest.json", manifest)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    pred_records = load_corpus(args.pred, strict=True)
    gold_records = load_corpus(args.gold, strict=True)
    report = equivalence_aware_report(
        [tree for _, tree in pred_records], [tree for _, tree in gold_records]
    )
    print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(report.as_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")
        manifest = RunManifest(
            command="compare",
            config={},
            inputs=[args.pred, args.gold],
            outputs=[args.out],
            seed=None,
            version=__version__,
            duration_seconds=time.perf_counter() - started,
            metrics=report.as_dict(),
        )
        _write_manifest(f"{args.out}.manifest.json", manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdp", description="Temporal dependency parsing toolkit."
    )
    parser.add_argument("--version", action="version", version=f"tdp {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    stats = commands.add_parser("stats", help="summarize a corpus file")
    stats.add_argument("corpus")
    _add_window_flags(stats)
    stats.add_argument("--lenient", action="store_true")
    stats.add_argument("--json", action="store_true")
    stats.set_defaults(func=cmd_stats)

    validate = commands.add_parser("validate", help="strictly check a corpus file")
    validate.add_argument("corpus")
    validate.set_defaults(func=cmd_validate)

    trainer = commands.add_parser("train", help="train a parser")
    trainer.add_argument("--train", required=True, metavar="CORPUS")
    trainer.add_argument("--dev", metavar="CORPUS")
    trainer.add_argument("--out", required=True, metavar="MODEL")
    trainer.add_argument(
        "--encoder",
        default=EncoderVariant.RANDOM_INIT_RECURRENT.value,
        choices=[v.value for v in EncoderVariant],
    )
    trainer.add_argument("--lr", help="learning rate, or comma list with --grid")
    trainer.add_argument("--epochs", help="epoch count, or comma list with --grid")
    trainer.add_argument("--batch-size", type=int, default=16)
    trainer.add_argument("--seed", type=int, default=0)
    trainer.add_argument("--runs", type=int, help="runs per grid cell (default 5)")
    _add_window_flags(trainer)
    trainer.add_argument(
        "--checkpoint",
        metavar="NAME",
        help="pretrained contextual model identifier for the contextual variants",
    )
    trainer.add_argument("--vectors", metavar="PATH", help="static word vectors file")
    trainer.add_argument("--embedding-dim", type=int, default=64)
    trainer.add_argument("--hidden-dim", type=int, default=64)
    trainer.add_argument("--select-best-dev", action="store_true")
    trainer.add_argument("--stop-at-dev-f1", type=float)
    trainer.add_argument("--grid", action="store_true", help="grid-search lr x epochs")
    trainer.add_argument("--lenient", action="store_true")
    trainer.set_defaults(func=cmd_train)

    parse = commands.add_parser("parse", help="parse documents with a trained model")
    parse.add_argument("--input", required=True, metavar="CORPUS")
    parse.add_argument("--out", required=True, metavar="PRED")
    source = parse.add_mutually_exclusive_group(required=True)
    source.add_argument("--checkpoint", metavar="MODEL")
    source.add_argument(
        "--inject-scores",
        metavar="PATH",
        help="JSONL of per-document score tables (test hook)",
    )
    parse.add_argument("--traces", metavar="PATH", help="write decode traces here")
    parse.add_argument("--jobs", type=int, default=1)
    parse.add_argument("--lenient", action="store_true")
    parse.set_defaults(func=cmd_parse)

    evaluator = commands.add_parser("eval", help="score predictions against gold")
    evaluator.add_argument("--pred", required=True, metavar="CORPUS")
    evaluator.add_argument("--gold", required=True, metavar="CORPUS")
    evaluator.add_argument("--out", metavar="REPORT_JSON")
    evaluator.set_defaults(func=cmd_eval)

    closure_cmd = commands.add_parser("closure", help="emit per-document closures")
    closure_cmd.add_argument("--input", required=True, metavar="CORPUS")
    closure_cmd.add_argument("--out", required=True, metavar="JSONL")
    closure_cmd.add_argument("--lenient", action="store_true")
    closure_cmd.set_defaults(func=cmd_closure)

    compare = commands.add_parser(
        "compare", help="closure-equivalence comparison of two tree files"
    )
    compare.add_argument("--pred", required=True, metavar="CORPUS")
    compare.add_argument("--gold", required=True, metavar="CORPUS")
    compare.add_argument("--out", metavar="REPORT_JSON")
    compare.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TdpError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
