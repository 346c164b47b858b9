"""
LabelMap - Command Line Interface
Subcommands: map, eval, plot, synth, compare.

Usage:
    python -m labelmap.main map --input data.csv --label-col label --out-coords map.csv
    python -m labelmap.main eval --input data.csv --coords map.csv --k 10
    python -m labelmap.main plot --coords map.csv --out-svg map.svg
"""

import argparse
import logging
import sys

from labelmap.config import (
    DEFAULT_EPOCHS, DEFAULT_LAMBDA_END, DEFAULT_LAMBDA_START, DEFAULT_SEED,
    DEFAULT_STRESS_EXPONENT, DEFAULT_WORKERS, LOG_FORMAT, LOG_LEVEL, PLOT_HEIGHT,
    PLOT_POINT_RADIUS, PLOT_WIDTH, ExitCode
)
from labelmap.errors import LabelMapError, NonFiniteUpdate, UsageError
from labelmap.export.results_writer import (
    read_embedding, report_rows_csv, write_comparison, write_embedding, write_report, write_trace
)
from labelmap.export.svg_renderer import PlotSpec, render_svg
from labelmap.ingest.dataset_loader import DatasetKind, DatasetSource, load_dataset
from labelmap.ingest.synthetic import overlapping_gaussians, planted_plane
from labelmap.mapping.geometry import DistanceMetric, normalize_distances
from labelmap.mapping.metrics import evaluate_map
from labelmap.mapping.optimizer import InitMethod, OptimizerConfig, StressOptimizer
from labelmap.mapping.stress import StressMode

logger = logging.getLogger('labelmap')


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def _add_input_args(parser):
    parser.add_argument('--input', required=True,
                        help='Feature CSV, or a distance matrix when --labels is given')
    parser.add_argument('--labels',
                        help='Labels file (one per line) for a distance-matrix input')
    parser.add_argument('--label-col', default='label',
                        help='Label column of a feature CSV (default: label)')
    parser.add_argument('--metric', choices=[m.value for m in DistanceMetric],
                        default=DistanceMetric.EUCLIDEAN.value,
                        help='Distance for feature CSV input (default: euclidean)')


def _add_schedule_args(parser):
    parser.add_argument('--epochs', type=int, default=DEFAULT_EPOCHS)
    parser.add_argument('--lambda-start', type=float, default=DEFAULT_LAMBDA_START)
    parser.add_argument('--lambda-end', type=float, default=DEFAULT_LAMBDA_END)
    parser.add_argument('--p', type=float, default=DEFAULT_STRESS_EXPONENT,
                        help='Stress exponent (default: 1)')
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED)
    parser.add_argument('--init', choices=[m.value for m in InitMethod],
                        default=InitMethod.CLASSICAL_MDS.value)
    parser.add_argument('--workers', type=int, default=DEFAULT_WORKERS,
                        help='Deterministic parallel width')
    parser.add_argument('--steps-per-epoch', type=int, default=None,
                        help='Anchor updates per epoch (default: n)')
    parser.add_argument('--normalize', choices=['none', 'mean'], default='none',
                        help='Rescale input distances before mapping')
    parser.add_argument('--cca-simplified-gradient', action='store_true',
                        help="Drop the F'(d*) term from the gradient")


def build_parser():
    parser = CliParser(prog='labelmap', description='Supervised 2-D mapping of labeled data')
    sub = parser.add_subparsers(dest='command', required=True)

    p_map = sub.add_parser('map', help='Compute a 2-D map')
    _add_input_args(p_map)
    _add_schedule_args(p_map)
    p_map.add_argument('--method', choices=[m.value for m in StressMode],
                       default=StressMode.CLASSIMAP.value)
    p_map.add_argument('--out-coords', required=True)
    p_map.add_argument('--out-trace')

    p_eval = sub.add_parser('eval', help='Score a map against its input')
    _add_input_args(p_eval)
    p_eval.add_argument('--coords', required=True)
    p_eval.add_argument('--k', type=int, default=None,
                        help='Neighborhood size (default: min(10, n-1), below n/2)')
    p_eval.add_argument('--out-report', help='Report file (default: stdout)')
    p_eval.add_argument('--format', choices=['text', 'csv'], default='text')

    p_plot = sub.add_parser('plot', help='Render a map as SVG')
    p_plot.add_argument('--coords', required=True)
    p_plot.add_argument('--out-svg', required=True)
    p_plot.add_argument('--width', type=int, default=PLOT_WIDTH)
    p_plot.add_argument('--height', type=int, default=PLOT_HEIGHT)
    p_plot.add_argument('--radius', type=float, default=PLOT_POINT_RADIUS)

    p_synth = sub.add_parser('synth', help='Write a synthetic feature CSV')
    p_synth.add_argument('--kind', choices=['gaussians', 'plane'], required=True)
    p_synth.add_argument('--n', type=int, default=200)
    p_synth.add_argument('--dim', type=int, default=None,
                         help='Feature dimension (default: 5 for gaussians, 8 for plane)')
    p_synth.add_argument('--separation', type=float, default=1.0)
    p_synth.add_argument('--seed', type=int, default=DEFAULT_SEED)
    p_synth.add_argument('--out', required=True)

    p_compare = sub.add_parser('compare', help='Map with every method and score each')
    _add_input_args(p_compare)
    _add_schedule_args(p_compare)
    p_compare.add_argument('--k', type=int, default=None)
    p_compare.add_argument('--out', required=True, help='CSV with one row per method')

    for subparser in (p_map, p_eval, p_plot, p_synth, p_compare):
        subparser.add_argument('--verbose', '-v', action='store_true',
                               help='Enable verbose logging')

    return parser


def _load(args):
    if args.labels:
        src = DatasetSource(DatasetKind.DISTANCE_MATRIX, args.input, labels_path=args.labels)
    else:
        src = DatasetSource(DatasetKind.FEATURE_TABLE, args.input,
                            label_column=args.label_col, metric=args.metric)
    return load_dataset(src)


def _optimizer_config(args, mode):
    return OptimizerConfig(
        epochs=args.epochs,
        steps_per_epoch=args.steps_per_epoch,
        lambda_start=args.lambda_start,
        lambda_end=args.lambda_end,
        p=args.p,
        seed=args.seed,
        init=args.init,
        mode=mode,
        simplified_cca_gradient=args.cca_simplified_gradient,
        workers=args.workers,
    )


def _trace_metadata(args, method):
    return {
        'method': method,
        'seed': args.seed,
        'workers': args.workers,
        'normalize': args.normalize,
        'epochs': args.epochs,
        'init': args.init,
        'p': args.p,
    }


def cmd_map(args):
    config = _optimizer_config(args, args.method)
    d, labels = _load(args)
    d = normalize_distances(d, args.normalize)

    try:
        embedding, trace = StressOptimizer(d, labels, config).run()
    except NonFiniteUpdate as e:
        if args.out_trace and e.trace is not None:
            write_trace(e.trace, args.out_trace, _trace_metadata(args, args.method))
        raise

    write_embedding(embedding, labels, args.out_coords)
    if args.out_trace:
        write_trace(trace, args.out_trace, _trace_metadata(args, args.method))
    return ExitCode.OK


def cmd_eval(args):
    d, labels = _load(args)
    embedding, map_labels = read_embedding(args.coords)
    if map_labels.labels != tuple(str(label) for label in labels.labels):
        logger.warning(f"Labels in {args.coords} differ from the input labels; using input labels")

    report = evaluate_map(d, embedding, labels, args.k)
    if args.out_report:
        write_report(report, args.out_report, args.format)
    elif args.format == 'csv':
        sys.stdout.write(report_rows_csv([report]))
    else:
        sys.stdout.write(report.to_text())
    return ExitCode.OK


def cmd_plot(args):
    embedding, labels = read_embedding(args.coords)
    spec = PlotSpec(width=args.width, height=args.height, point_radius=args.radius)
    render_svg(embedding, labels, spec, args.out_svg)
    return ExitCode.OK


def cmd_synth(args):
    if args.kind == 'gaussians':
        dataset = overlapping_gaussians(args.n, args.dim or 5, args.separation, args.seed)
    else:
        dataset = planted_plane(args.n, args.dim or 8, args.seed)
    dataset.write_csv(args.out)
    return ExitCode.OK


def cmd_compare(args):
    configs = {mode: _optimizer_config(args, mode) for mode in StressMode}
    d, labels = _load(args)
    mapped = normalize_distances(d, args.normalize)
    rows = []
    for mode, config in configs.items():
        embedding, _ = StressOptimizer(mapped, labels, config).run()
        rows.append((mode.value, evaluate_map(d, embedding, labels, args.k)))
    write_comparison(rows, args.out)
    return ExitCode.OK


COMMANDS = {
    'map': cmd_map,
    'eval': cmd_eval,
    'plot': cmd_plot,
    'synth': cmd_synth,
    'compare': cmd_compare,
}


def _setup_logging(verbose):
    level = logging.DEBUG if verbose else getattr(logging, LOG_LEVEL, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def cli_main(argv):
    """
    Run one CLI command.

    Returns:
        exit code: 0 ok, 1 usage error, 2 data or IO error, 3 numeric failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"labelmap: error: {e}", file=sys.stderr)
        return ExitCode.USAGE
    except SystemExit as e:
        # --help
        return e.code or ExitCode.OK

    _setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except LabelMapError as e:
        logger.debug(f"{type(e).__name__} in {args.command}", exc_info=True)
        print(f"labelmap: error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.debug(f"IO failure in {args.command}", exc_info=True)
        print(f"labelmap: error: {e}", file=sys.stderr)
        return ExitCode.DATA


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == '__main__':
    main()
