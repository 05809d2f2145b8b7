"""
Command line entry point: run, roc and compare
"""
from pathlib import Path
from typing import List, Optional
import argparse
import logging
import os
import sys

from csslearn import __description__, __title__, __version__
from csslearn.config import settings
from csslearn.errors import ConfigurationError, OutputError
from csslearn.experiments import compare, roc_frame, roc_sweep
from csslearn.metrics import cumulative_frame, emit_csv, write_frame
from csslearn.models import Algorithm
from csslearn.plots import plot_metrics, plot_roc
from csslearn.sim.engine import ScenarioEngine
from csslearn.utils.config import ConfigManager

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def setup_logging(level: Optional[str] = None) -> None:
    """Configure root logging to the log file and the console"""
    log_path = settings.log_path
    os.makedirs(log_path, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(os.path.join(log_path, "csslearn.log")),
            logging.StreamHandler()
        ]
    )


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


class CliParser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1); subcommand parsers inherit this"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog=__title__, description=__description__)
    parser.add_argument("--version", action="version", version=f"{__title__} {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides CSSLEARN_LOG_LEVEL")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML scenario file")
    common.add_argument("--preset", help="gsc, msc, bsc or custom")
    common.add_argument("--seed", type=int)
    common.add_argument("--steps", type=int)
    common.add_argument("--algo", help=", ".join(a.value for a in Algorithm))
    common.add_argument("--out", help="output CSV path")
    common.add_argument("--plot", action="store_true", help="also write SVG plots next to the CSV")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run one scenario")

    roc = sub.add_parser("roc", parents=[common], help="empirical FC ROC over target P_fa values")
    roc.add_argument("--pfa-list", type=_float_list, required=True, help="e.g. 0.01,0.05,0.1,0.2")
    roc.add_argument("--workers", type=int, default=None)

    cmp_ = sub.add_parser("compare", parents=[common], help="several algorithms on a shared seed")
    cmp_.add_argument("--algos", type=_name_list, required=True, help="e.g. hedge-sc,or,and")
    cmp_.add_argument("--seeds", type=int, default=1, help="replicates for the multi-seed mean")
    cmp_.add_argument("--workers", type=int, default=None)
    return parser


def load_config(args: argparse.Namespace):
    overrides = {
        "preset": args.preset,
        "seed": args.seed,
        "steps": args.steps,
        "algorithm": args.algo,
    }
    return ConfigManager.load(args.config, overrides)


def _output_path(args: argparse.Namespace, name: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(settings.output_dir) / name


def command_run(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    out = _output_path(args, f"run_{cfg.algorithm.value}_{cfg.seed}.csv")
    engine = ScenarioEngine(cfg)
    log = engine.run()
    emit_csv(log, out)
    ConfigManager.dump(cfg, out.with_suffix(".config.yaml"))
    if args.plot:
        plot_metrics(cumulative_frame(log), out.parent, prefix=out.stem)
    return EXIT_OK


def command_roc(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    out = _output_path(args, f"roc_{cfg.algorithm.value}_{cfg.seed}.csv")
    points = roc_sweep(cfg, args.pfa_list, workers=args.workers)
    frame = roc_frame(points)
    write_frame(frame, out)
    if args.plot:
        plot_roc(frame, out.with_suffix(".svg"), label=cfg.algorithm.value)
    return EXIT_OK


def command_compare(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    try:
        algorithms = [Algorithm(name) for name in args.algos]
    except ValueError as e:
        raise ConfigurationError(str(e)) from e
    out = _output_path(args, f"compare_{cfg.preset.value}_{cfg.seed}.csv")
    result = compare(cfg, algorithms, seeds=args.seeds, workers=args.workers)
    write_frame(result.single_seed, out)
    if args.seeds > 1:
        write_frame(result.mean, out.with_name(f"{out.stem}_mean{out.suffix}"))
    if args.plot:
        plot_metrics(result.single_seed, out.parent, prefix=out.stem)
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "roc": command_roc,
    "compare": command_compare,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    logger.info(f"Starting {__title__} v{__version__}: {args.command}")
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except OutputError as e:
        logger.error(f"Output error: {e}")
        return EXIT_RUNTIME
    except Exception as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
