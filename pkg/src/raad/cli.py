"""Command-line front end.

serve     run the HTTP service
process   adjust one NDJSON batch locally and print the result as JSON
annotate  record a false positive against a running service
diagnose  class-separability report for a labeled embedding file
bench     run the synthetic feedback-loop benchmark

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .core import InvalidHyperparameter
from .diagnostics import LabeledEmbeddingSet, jaccard_separability
from .pipeline import BatchEngine
from .store import CorruptSnapshot, FpStore, StorageFailure, UnsupportedVersion
from .synth import SyntheticSpec, default_spec, run_feedback_loop
from .service.config import load_service_config
from .service.ndjson import parse_events
from .service.wire import batch_result_to_dict, config_to_dict

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _add_config_flags(parser: argparse.ArgumentParser, with_listen: bool = False) -> None:
    parser.add_argument("--config", help="service config JSON file")
    parser.add_argument("--store", help="annotation store snapshot path")
    if with_listen:
        parser.add_argument("--listen", help="host:port to bind (default 127.0.0.1:8000)")
    parser.add_argument("--tau", type=float, help="similarity threshold in (0, 1)")
    parser.add_argument("--alpha", type=float, help="curve sharpness >= 1")
    parser.add_argument("--delta", type=float, help="euclidean distance gate > 0")
    parser.add_argument("--threshold", type=float, help="alert threshold on the adjusted score")
    parser.add_argument("--score-kind", choices=["probability", "loss"], help="score semantics")


def _service_config(args: argparse.Namespace):
    return load_service_config(
        args.config,
        store_path=getattr(args, "store", None),
        listen=getattr(args, "listen", None),
        tau=args.tau,
        alpha=args.alpha,
        delta=args.delta,
        alert_threshold=args.threshold,
        score_kind=args.score_kind,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raad", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    _add_config_flags(p_serve, with_listen=True)

    p_process = sub.add_parser("process", help="adjust one NDJSON batch locally")
    p_process.add_argument("input", help="NDJSON file of scored events, or - for stdin")
    _add_config_flags(p_process)

    p_annotate = sub.add_parser("annotate", help="record a false positive via a running service")
    p_annotate.add_argument("--url", default=os.environ.get("RAAD_URL", "http://127.0.0.1:8000"))
    p_annotate.add_argument("--batch-id", type=int, required=True)
    p_annotate.add_argument("--event-id", required=True)
    p_annotate.add_argument("--annotator", required=True)
    p_annotate.add_argument("--note")

    p_diag = sub.add_parser("diagnose", help="embedding-space separability report")
    p_diag.add_argument("input", help='NDJSON file of {"embedding": [...], "label": "..."} lines')
    p_diag.add_argument("--anchors", type=int, help="quantization cell count (default 4x classes)")
    p_diag.add_argument("--seed", type=int, default=0)

    p_bench = sub.add_parser("bench", help="synthetic feedback-loop benchmark")
    p_bench.add_argument("--spec", help="synthetic stream spec JSON (default: built-in)")
    p_bench.add_argument("--json", dest="json_out", help="write the JSON report to this path")
    p_bench.add_argument("--csv", dest="csv_out", help="write the per-round CSV to this path")
    _add_config_flags(p_bench)

    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    cfg = _service_config(args)
    uvicorn.run(create_app(cfg), host=cfg.host, port=cfg.port, log_level="info")
    return EXIT_OK


def _cmd_process(args: argparse.Namespace) -> int:
    cfg = _service_config(args)
    try:
        if args.input == "-":
            body = sys.stdin.buffer.read()
        else:
            with open(args.input, "rb") as fh:
                body = fh.read()
    except OSError as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        parsed = parse_events(body)
    except UnicodeDecodeError:
        print("error: input is not UTF-8 NDJSON", file=sys.stderr)
        return EXIT_VALIDATION

    store_path = getattr(args, "store", None) or cfg.store_path
    try:
        store = FpStore.open(store_path) if store_path else FpStore()
    except (CorruptSnapshot, UnsupportedVersion, StorageFailure) as exc:
        print(f"error: cannot open store: {exc}", file=sys.stderr)
        return EXIT_IO

    engine = BatchEngine(store, cfg.adjustment, retention=cfg.retention)
    result = engine.process_batch(parsed.events)
    payload = batch_result_to_dict(result, parsed.line_numbers, parsed.rejects)
    json.dump(payload, sys.stdout)
    print()
    return EXIT_OK


def _cmd_annotate(args: argparse.Namespace) -> int:
    import httpx

    headers = {}
    token = os.environ.get("RAAD_TOKEN")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    body = {"batch_id": args.batch_id, "event_id": args.event_id, "annotator": args.annotator}
    if args.note is not None:
        body["note"] = args.note
    try:
        response = httpx.post(f"{args.url.rstrip('/')}/v1/annotations", json=body, headers=headers, timeout=30.0)
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_IO
    if response.status_code != 201:
        print(f"error: service returned {response.status_code}: {response.text}", file=sys.stderr)
        return EXIT_VALIDATION
    print(response.text)
    return EXIT_OK


def _cmd_diagnose(args: argparse.Namespace) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO

    points, labels = [], []
    for line_no, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
            points.append(obj["embedding"])
            labels.append(str(obj["label"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            print(f"error: line {line_no}: {exc}", file=sys.stderr)
            return EXIT_VALIDATION

    try:
        data = LabeledEmbeddingSet(points, labels)
        report = jaccard_separability(data, anchors=args.anchors, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if report.warning:
        print(
            f"warning: max pairwise class overlap {report.jaccard_max:.3f} exceeds 0.10; "
            "suppression in this space may eat true positives",
            file=sys.stderr,
        )
    json.dump(report.to_report(), sys.stdout)
    print()
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.spec:
        try:
            with open(args.spec, "r", encoding="utf-8") as fh:
                spec = SyntheticSpec.from_dict(json.load(fh))
        except OSError as exc:
            print(f"error: cannot read spec: {exc}", file=sys.stderr)
            return EXIT_IO
        except (ValueError, KeyError, TypeError) as exc:
            print(f"error: invalid spec: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    else:
        spec = default_spec()

    cfg = _service_config(args).adjustment
    report = run_feedback_loop(spec, cfg)
    rendered = report.to_json()
    if args.json_out:
        try:
            with open(args.json_out, "w", encoding="utf-8") as fh:
                fh.write(rendered + "\n")
        except OSError as exc:
            print(f"error: cannot write JSON report: {exc}", file=sys.stderr)
            return EXIT_IO
    if args.csv_out:
        try:
            with open(args.csv_out, "w", encoding="utf-8") as fh:
                fh.write(report.to_csv())
        except OSError as exc:
            print(f"error: cannot write CSV report: {exc}", file=sys.stderr)
            return EXIT_IO
    if not args.json_out:
        print(rendered)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "process": _cmd_process,
        "annotate": _cmd_annotate,
        "diagnose": _cmd_diagnose,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except InvalidHyperparameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, StorageFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
