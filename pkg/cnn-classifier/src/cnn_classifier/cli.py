"""Command-line entry points: train on a dataset directory, score traces."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CnnClassifierError
from .infer import infer_file
from .train import TrainParams, train


def cmd_train(args) -> int:
    params = TrainParams(train_fraction=args.train_fraction)
    report = train(args.data, args.out, seed=args.seed, params=params)
    print(
        f"train accuracy {report.train.accuracy:.4f} "
        f"({report.train.total} traces), "
        f"test accuracy {report.test.accuracy:.4f} ({report.test.total} traces)"
    )
    return 0


def cmd_infer(args) -> int:
    probability = infer_file(args.model, args.trace)
    label = "HUMAN" if probability >= 0.5 else "NON_HUMAN"
    print(json.dumps({"probability": probability, "label": label}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cnn-classifier",
        description="1D CNN human-presence classifier over phase-trace datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a dataset directory")
    p.add_argument("--data", required=True, metavar="DIR", help="dataset directory")
    p.add_argument("--out", required=True, metavar="DIR", help="where to write model.bin + report.json")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--train-fraction", type=float, default=0.7, metavar="F")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="score one trace CSV")
    p.add_argument("--model", required=True, metavar="PATH")
    p.add_argument("--trace", required=True, metavar="PATH")
    p.set_defaults(func=cmd_infer)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CnnClassifierError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
