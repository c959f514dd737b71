"""Command-line entry point.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ParameterError
from .experiments import SUBCOMMANDS, ExperimentConfig, run_experiment
from .greedy import ALGORITHMS
from .report import csv_text, emit_csv, emit_svg, output_paths, summary_lines

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    d = ExperimentConfig()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=d.seed)
    common.add_argument("--num-samples", type=int, default=d.num_samples, metavar="N")
    common.add_argument("--iterations", type=int, default=d.iterations, metavar="K")
    common.add_argument("--algorithm", choices=ALGORITHMS, default=d.algorithm)
    common.add_argument("--shrinkage", type=float, default=d.shrinkage, metavar="S")
    common.add_argument("--alpha", type=float, default=d.alpha, metavar="A")
    common.add_argument("--epsilon", type=float, default=None, metavar="E")
    common.add_argument("--delta", type=float, default=None, metavar="D")
    common.add_argument("--noise-scale", type=float, default=d.noise_scale, metavar="X")
    common.add_argument("--skip-prefix", type=int, default=d.skip_prefix, metavar="P")
    common.add_argument("--max-exponent", type=int, default=d.max_exponent, metavar="J",
                        help="lower-bound: largest n is 2**J")
    common.add_argument("--output", default=None, metavar="PATH")
    common.add_argument("--format", choices=("csv", "svg", "both"), default=d.format)
    common.add_argument("--threads", type=int, default=d.threads,
                        help="worker threads for the ridge argmax (output is identical)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="greedylab",
        description="Greedy dictionary approximation experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "ridge2d": "greedy approximation with Heaviside ridge atoms on [0,1]^2",
        "lower-bound": "OGA residuals on the sequence dictionary k^-alpha e_k",
        "counterexample": "variation norm of OGA iterates on a five-atom dictionary",
        "noise": "OGA on the ridge target plus Gaussian noise",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    opts = vars(args)
    opts.pop("verbose")
    config = ExperimentConfig(**opts)
    try:
        report = run_experiment(config)
    except ParameterError as exc:
        print(f"greedylab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    info = sys.stdout
    try:
        if config.output is None:
            sys.stdout.write(csv_text(report))
            info = sys.stderr
        else:
            paths = output_paths(config.output, config.format)
            if "csv" in paths:
                emit_csv(report, paths["csv"])
            if "svg" in paths:
                emit_svg(report, paths["svg"])
            for kind, path in paths.items():
                print(f"wrote {kind}: {path}", file=info)
    except OSError as exc:
        print(f"greedylab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    for line in summary_lines(report):
        print(line, file=info)
    print(f"elapsed: {report.duration:.2f}s", file=info)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
