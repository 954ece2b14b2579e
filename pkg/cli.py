"""
Behaviour Clusters Command Line
Run the behavioural scoring pipeline in one shot or stage by stage
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from loguru import logger

from config import PipelineConfig, load_config, settings
from pipeline.runner import PipelineRunner
from utils.errors import BehaviourError, ConfigError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

STAGES = ("pipeline", "simulate", "fit", "dissim", "cluster", "score", "evaluate")
FAILED_MARKER = "FAILED"
LOG_FILE = "run.log"

# argparse destination -> PipelineConfig field
OPTION_FIELDS = {
    "input": "input_path",
    "synthetic": "synthetic_spec",
    "alpha": "alpha",
    "k": "k",
    "measure": "measure",
    "n_samples": "n_samples",
    "seed": "seed",
    "train_fraction": "train_fraction",
    "experiment": "experiment",
    "designs": "designs",
    "output_dir": "output_dir",
    "threads": "threads",
    "t_min": "t_min",
    "consecutive_misses": "consecutive_misses",
    "c_convention": "c_convention",
    "covariance": "covariance",
    "stratify": "stratify",
    "ridge": "ridge",
    "h_severity_a": "h_severity_a",
    "h_severity_b": "h_severity_b",
    "excel": "excel",
}


def common_options() -> argparse.ArgumentParser:
    """Options shared by every subcommand"""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="flat key = value config file")
    parent.add_argument("--input", help="long-format account CSV")
    parent.add_argument("--synthetic", help="synthetic spec JSON, or `default`")
    parent.add_argument("--alpha", type=float, help="ellipsoid significance level (default 0.05)")
    parent.add_argument("--k", type=int, help="number of clusters (default 3)")
    parent.add_argument("--measure", choices=["ellipsoid", "euclidean"], help="dissimilarity (default ellipsoid)")
    parent.add_argument("--n-samples", type=int, help="Monte Carlo draws per pair (default 20000)")
    parent.add_argument("--seed", type=int, help="root seed (default 0)")
    parent.add_argument("--train-fraction", type=float, help="training share of accounts (default 0.6)")
    parent.add_argument("--experiment", choices=["predict", "forecast", "both"], help="default both")
    parent.add_argument("--designs", help="comma-separated subset of cluster_dummies,aggregate,combined")
    parent.add_argument("--output-dir", type=Path, help="artifact directory")
    parent.add_argument("--threads", type=int, help="worker threads for dissimilarities")
    parent.add_argument("--t-min", type=int, help="minimum months per modelled window (default 8)")
    parent.add_argument("--consecutive-misses", type=int, help="default rule run length (default 3)")
    parent.add_argument("--c-convention", choices=["squared", "sqrt"], help="ellipsoid radius convention")
    parent.add_argument("--covariance", choices=["kronecker", "block_diagonal"], help="coefficient covariance")
    parent.add_argument("--stratify", action="store_true", default=None, help="stratify the split by default status")
    parent.add_argument("--excel", action="store_true", default=None, help="also write scorecard.xlsx")
    parent.add_argument("--ridge", type=float, help="logistic L2 penalty (intercept unpenalised)")
    parent.add_argument("--h-severity-a", type=float, help="H-measure Beta severity a")
    parent.add_argument("--h-severity-b", type=float, help="H-measure Beta severity b")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="behaviour-clusters",
        description="Cluster credit card accounts by VAR(1) behaviour and score default risk",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = common_options()
    descriptions = {
        "pipeline": "run every stage: ingest, fit, matrix, cluster, score, evaluate",
        "simulate": "write a synthetic portfolio and its true clusters",
        "fit": "split accounts and fit VAR(1) models",
        "dissim": "compute the training dissimilarity matrix",
        "cluster": "PAM clustering, hold-out allocation and cluster profiles",
        "score": "fit the logistic scorecards and score the hold-out sample",
        "evaluate": "H-measure, KS, Gini and AUC per model",
    }
    for stage in STAGES:
        subparsers.add_parser(stage, parents=[parent], help=descriptions[stage])
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, Any]:
    return {field: getattr(args, option) for option, field in OPTION_FIELDS.items()}


def configure_logging(output_dir: Path) -> None:
    """stderr at the configured level plus run.log in the output directory"""
    logger.remove()
    logger.add(sys.stderr, level=settings.log_level.upper())
    output_dir.mkdir(parents=True, exist_ok=True)
    logger.add(output_dir / LOG_FILE, level="DEBUG", mode="a", encoding="utf-8")


def run_stage(command: str, config: PipelineConfig) -> None:
    runner = PipelineRunner(config)
    stages = {
        "pipeline": runner.pipeline,
        "simulate": runner.simulate,
        "fit": runner.fit,
        "dissim": runner.dissim,
        "cluster": runner.cluster,
        "score": runner.score,
        "evaluate": runner.evaluate,
    }
    stages[command]()


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        config = load_config(args.config, overrides_from(args))
    except ConfigError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE

    output_dir = Path(config.output_dir)
    configure_logging(output_dir)
    marker = output_dir / FAILED_MARKER
    marker.unlink(missing_ok=True)

    logger.info("=" * 60)
    logger.info(f"🚀 BEHAVIOUR CLUSTERS - {args.command.upper()}")
    logger.info("=" * 60)

    try:
        run_stage(args.command, config)
    except (ConfigError, FileNotFoundError) as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    except BehaviourError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        marker.write_text(f"{type(e).__name__}: {e}\n", encoding="utf-8")
        return EXIT_FAILED
    except Exception as e:
        logger.exception(f"❌ Unexpected error in {args.command}: {e}")
        marker.write_text(f"{type(e).__name__}: {e}\n", encoding="utf-8")
        return EXIT_FAILED

    logger.info("=" * 60)
    logger.info(f"✅ {args.command.upper()} COMPLETE! Artifacts in {output_dir}")
    logger.info("=" * 60)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
