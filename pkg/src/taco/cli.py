"""Command-line entry point.

Subcommands: annotate, caption, synth, dataset, nearnbr, eval.  This module
only parses flags and wires library calls together; no numeric logic lives
here.

Exit codes: 0 success, 1 usage error, 2 data error, 3 external-service error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .annotator import DetectorParams, TimeSeriesClass, annotate, load_config
from .captioner import (
    DEFAULT_IN_FLIGHT,
    ENDPOINT_ENV,
    base_caption,
    rephrase,
    rephrase_many,
)
from .errors import (
    EmptyCompletion,
    InvalidArgument,
    ProtocolError,
    TacoError,
    Unavailable,
)
from .evalkit import evaluate_corpus, load_index, nearnbr_caption, report_to_json
from .pipeline import (
    IngestSpec,
    build_dataset,
    build_forward_dataset,
    ingest_csv,
    read_jsonl,
    write_jsonl,
)
from .signal import Series, resample_linear

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SERVICE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems via exit code 1."""

    def error(self, message):
        self.print_help(sys.stderr)
        print(f"\nerror: {message}", file=sys.stderr)
        raise _UsageError(message)


def _json_scores(scores: dict) -> dict:
    return {
        name: (value if value is None or math.isfinite(value) else None)
        for name, value in scores.items()
    }


def _load_params(path: str | None) -> DetectorParams:
    if path is None:
        return DetectorParams()
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"params file {path} is not valid JSON: {exc}") from exc
    return DetectorParams.from_json_dict(data)


def _emit_rows(rows, out: str | None) -> None:
    if out:
        write_jsonl(rows, out)
    else:
        for row in rows:
            data = row.to_json_dict() if hasattr(row, "to_json_dict") else row
            print(json.dumps(data, allow_nan=False))


def _add_ingest_flags(parser) -> None:
    parser.add_argument("--input", action="append", required=True,
                        help="input CSV file (repeatable)")
    parser.add_argument("--column", action="append", default=None,
                        help="column to ingest (repeatable; default: all numeric)")
    parser.add_argument("--window", type=int, default=300,
                        help="window length in samples (default 300)")
    parser.add_argument("--target-len", type=int, default=2048,
                        help="resampled length per window (default 2048)")
    parser.add_argument("--stride", type=int, default=None,
                        help="window stride (default: window length)")


def _add_config_flags(parser) -> None:
    parser.add_argument("--config", default=None,
                        help="threshold config JSON (default: embedded defaults)")
    parser.add_argument("--params", default=None,
                        help="detector params JSON (default: built-in defaults)")


def _add_rephrase_flags(parser) -> None:
    parser.add_argument("--rephrase", action="store_true",
                        help="rephrase captions through the LLM endpoint")
    parser.add_argument("--endpoint", default=None,
                        help="rephrase endpoint (default: $TACO_LLM_ENDPOINT)")
    parser.add_argument("--model", default=None,
                        help="rephrase model name (default: $TACO_LLM_MODEL)")


def _ingest_spec(args) -> IngestSpec:
    return IngestSpec(
        inputs=tuple(args.input),
        columns=tuple(args.column) if args.column else None,
        window_len=args.window,
        target_len=args.target_len,
        stride=args.stride,
    )


def _cmd_annotate(args) -> int:
    params = _load_params(args.params)
    cfg = load_config(args.config)
    spec = _ingest_spec(args)
    rows = []
    for tag, values in ingest_csv(spec):
        try:
            resampled = resample_linear(values, spec.target_len)
            annotation = annotate(Series(values=resampled), params, cfg, series_id=tag)
        except TacoError as exc:
            print(f"skipping {tag}: {exc}", file=sys.stderr)
            continue
        rows.append({
            "id": tag,
            "source": tag,
            "classes": annotation.class_names(),
            "scores": _json_scores(annotation.scores.as_dict()),
            "params_digest": annotation.params_digest,
        })
    _emit_rows(rows, args.out)
    return EXIT_OK


def _cmd_caption(args) -> int:
    if bool(args.classes) == bool(args.input):
        print("error: caption needs exactly one of --classes or --input",
              file=sys.stderr)
        return EXIT_USAGE
    if args.classes:
        classes = {TimeSeriesClass.from_name(n.strip())
                   for n in args.classes.split(",") if n.strip()}
        text = base_caption(classes)
        if args.rephrase:
            text = rephrase(text, endpoint=args.endpoint, model=args.model)
        print(text)
        return EXIT_OK
    rows = []
    for record in read_jsonl(args.input):
        classes = {TimeSeriesClass.from_name(n) for n in record.classes}
        rows.append({"id": record.id, "caption_base": base_caption(classes)})
    if args.rephrase:
        rephrased = rephrase_many(
            [row["caption_base"] for row in rows],
            endpoint=args.endpoint, model=args.model,
            max_in_flight=args.jobs or DEFAULT_IN_FLIGHT)
        for row, new in zip(rows, rephrased):
            row["caption_rephrased"] = new
    _emit_rows(rows, args.out)
    return EXIT_OK


def _cmd_synth(args) -> int:
    params = _load_params(args.params)
    cfg = load_config(args.config)
    constraints = ([s.strip() for s in args.shapes.split(",") if s.strip()]
                   if args.shapes else None)
    records, _ = build_forward_dataset(
        n=args.count,
        master_seed=args.seed,
        annotate_also=args.annotate_also,
        params=params,
        cfg=cfg,
        include_values=not args.no_values,
        length=args.length,
        constraints=constraints,
    )
    _emit_rows(records, args.out)
    return EXIT_OK


def _cmd_dataset(args) -> int:
    params = _load_params(args.params)
    cfg = load_config(args.config)
    spec = _ingest_spec(args)
    endpoint = None
    if args.rephrase:
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            print(f"--rephrase requested but no endpoint configured "
                  f"(set {ENDPOINT_ENV}); emitting base captions only",
                  file=sys.stderr)
    records, skips = build_dataset(
        spec,
        params=params,
        cfg=cfg,
        rephrase_endpoint=endpoint,
        rephrase_model=args.model,
        jobs=args.jobs,
        include_values=not args.no_values,
    )
    _emit_rows(records, args.out)
    if skips:
        skip_path = args.skip_log or (f"{args.out}.skipped.jsonl" if args.out else None)
        if skip_path:
            write_jsonl(skips, skip_path)
            print(f"{len(skips)} window(s) skipped, reasons in {skip_path}",
                  file=sys.stderr)
        else:
            for entry in skips:
                print(f"skipped {entry['source']}: {entry['reason']}", file=sys.stderr)
    return EXIT_OK


def _cmd_nearnbr(args) -> int:
    index = load_index(args.index)
    rows = []
    for record in read_jsonl(args.queries):
        if record.values is None:
            raise InvalidArgument(f"query record {record.id!r} has no values")
        caption, neighbor_id, mse = nearnbr_caption(record.values, index)
        rows.append({
            "id": record.id,
            "caption_base": caption,
            "neighbor_id": neighbor_id,
            "mse": mse,
        })
    _emit_rows(rows, args.out)
    return EXIT_OK


def _cmd_eval(args) -> int:
    report = evaluate_corpus(args.candidates, args.references)
    text = report_to_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="taco",
                     description="Descriptive time-series classes, captions, "
                                 "synthetic signals and caption datasets.")
    parser.add_argument("--version", action="version", version=f"taco {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("annotate", help="assign classes to CSV windows")
    _add_ingest_flags(p)
    _add_config_flags(p)
    p.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("caption", help="generate base captions from classes")
    _add_rephrase_flags(p)
    p.add_argument("--classes", default=None,
                   help="comma-separated class names, e.g. Rising,Smooth")
    p.add_argument("--input", default=None,
                   help="JSONL with class lists (one caption per record)")
    p.add_argument("--jobs", type=int, default=None,
                   help="max in-flight rephrase requests")
    p.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    p.set_defaults(func=_cmd_caption)

    p = sub.add_parser("synth", help="generate labeled synthetic signals")
    _add_config_flags(p)
    p.add_argument("--count", type=int, required=True, help="number of records")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--length", type=int, default=2048, help="samples per signal")
    p.add_argument("--shapes", default=None,
                   help="comma-separated shape subset to sample from")
    p.add_argument("--annotate-also", action="store_true",
                   help="append backward captions and classes to each record")
    p.add_argument("--no-values", action="store_true",
                   help="omit value vectors from records")
    p.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("dataset", help="build a caption dataset from CSV input")
    _add_ingest_flags(p)
    _add_config_flags(p)
    _add_rephrase_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--no-values", action="store_true",
                   help="omit value vectors from records")
    p.add_argument("--skip-log", default=None,
                   help="sidecar JSONL for skipped windows")
    p.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    p.set_defaults(func=_cmd_dataset)

    p = sub.add_parser("nearnbr", help="retrieval baseline over a training index")
    p.add_argument("--index", required=True, help="training JSONL with values")
    p.add_argument("--queries", required=True, help="query JSONL with values")
    p.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    p.set_defaults(func=_cmd_nearnbr)

    p = sub.add_parser("eval", help="score candidate captions against references")
    p.add_argument("--candidates", required=True, help="candidate JSONL")
    p.add_argument("--references", required=True, help="reference JSONL")
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.set_defaults(func=_cmd_eval)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except _UsageError:
        return EXIT_USAGE
    except (Unavailable, ProtocolError, EmptyCompletion) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except TacoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
