"""Command line interface.

Verbs: train fits a network on a pattern file and reports; recall runs
inference with a trained checkpoint; inspect prints the detector table
of a checkpoint; trace streams the presentation-by-presentation JSON
records; selftest runs the acceptance criteria. Exit codes: 0 success,
1 invalid input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from .errors import (
    CheckpointError,
    CondetError,
    ConfigError,
    DimensionMismatchError,
    PatternParseError,
    UnknownTeacherError,
)
from .harness import (
    ExperimentConfig,
    describe_detectors,
    emit_trace,
    evaluate_recall,
    labels_from_meta,
    load_checkpoint,
    load_patterns,
    run_experiment,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

_INVALID_ERRORS = (
    ConfigError,
    PatternParseError,
    DimensionMismatchError,
    CheckpointError,
    UnknownTeacherError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condet",
        description="Deterministic concept-detector network simulator.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser, patterns_required: bool = True) -> None:
        p.add_argument("--patterns", required=patterns_required, help="pattern JSON file")
        p.add_argument("--config", help="config JSON file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--strict-gt", action="store_true", help="use > at the threshold")

    train = sub.add_parser("train", help="fit a network on a pattern set")
    common(train)
    train.add_argument("--checkpoint", help="write the trained network here")
    train.add_argument("--trace", help="write the JSON-lines trace here")

    recall_p = sub.add_parser("recall", help="infer labels for a pattern set")
    common(recall_p)
    recall_p.add_argument("--checkpoint", help="trained network to load")
    recall_p.add_argument("--trace", help="write the JSON-lines trace here")

    inspect_p = sub.add_parser("inspect", help="print the detector table of a checkpoint")
    inspect_p.add_argument("--checkpoint", required=True, help="network to inspect")

    trace_p = sub.add_parser("trace", help="train and stream trace records to stdout")
    common(trace_p)
    trace_p.add_argument("--trace", help="write records here instead of stdout")

    selftest = sub.add_parser("selftest", help="run the acceptance criteria")
    selftest.add_argument(
        "criteria",
        nargs="*",
        type=int,
        help="criterion numbers to run (default: all)",
    )
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = (
        ExperimentConfig.from_file(args.config)
        if args.config
        else ExperimentConfig()
    )
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "strict_gt", False):
        config.strict_gt = True
    config.validate()
    return config


def _print_json(data: Any) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config.mode = "train"
    patterns = load_patterns(args.patterns)
    report = run_experiment(
        config,
        patterns,
        trace_path=args.trace,
        checkpoint_path=args.checkpoint,
    )
    _print_json(report.to_dict())
    return EXIT_OK


def _cmd_recall(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config.mode = "recall"
    patterns = load_patterns(args.patterns)
    if args.checkpoint:
        net, meta = load_checkpoint(args.checkpoint)
        label_map = labels_from_meta(meta)
        report = run_experiment(
            config, patterns, trace_path=args.trace, net=net, label_map=label_map
        )
    else:
        report = run_experiment(config, patterns, trace_path=args.trace)
    _print_json(report.to_dict())
    return EXIT_OK


def _cmd_inspect(args: argparse.Namespace) -> int:
    net, meta = load_checkpoint(args.checkpoint)
    label_map = labels_from_meta(meta)
    _print_json(
        {
            "cycle": net.cycle,
            "modules": [m.module_id for m in net.ps_modules],
            "labels": {name: str(a) for name, a in label_map.items()},
            "couplings": [[str(a), str(b)] for a, b in net.couplings],
            "detectors": describe_detectors(net, label_map),
        }
    )
    return EXIT_OK


def _cmd_trace(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config.mode = "train"
    patterns = load_patterns(args.patterns)
    from .harness import build_from_config, train_epochs

    net, label_map = build_from_config(config, patterns)
    records: list[dict[str, Any]] = []
    train_epochs(net, patterns, label_map, config, records)
    evaluate_recall(net, patterns, label_map, records)
    if args.trace:
        with open(args.trace, "w") as stream:
            emit_trace(records, stream)
    else:
        emit_trace(records, sys.stdout)
    return EXIT_OK


def _cmd_selftest(args: argparse.Namespace) -> int:
    from .acceptance import run_criteria

    ok = run_criteria(args.criteria or None, stream=sys.stdout)
    return EXIT_OK if ok else EXIT_RUNTIME


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "train": _cmd_train,
        "recall": _cmd_recall,
        "inspect": _cmd_inspect,
        "trace": _cmd_trace,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.verb](args)
    except _INVALID_ERRORS as exc:
        print(f"condet: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CondetError, OSError) as exc:
        print(f"condet: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
