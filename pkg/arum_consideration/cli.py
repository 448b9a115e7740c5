"""
CLI module - main entry point and orchestration.

Coordinates a scenario run: load, analyse, write, summarize.
"""

import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from . import __version__
from .analyses import AnalysisContext, run_analysis
from .config import Config, load_config
from .errors import ArumError
from .model_io import content_hash, model_to_dict
from .models import GumbelShocks
from .report_writer import ReportWriter
from .scenario import SCENARIO_SCHEMA, load_inputs, load_scenario, resolve_settings


@dataclass
class RunStats:
    """Statistics from a scenario run."""

    analyses_run: int = 0
    files_written: int = 0
    files_unchanged: int = 0
    output_dir: Optional[Path] = None
    analysis_names: List[str] = field(default_factory=list)


def setup_logging(verbose: bool = False, quiet: bool = False, level_name: str = "INFO"):
    """Configure logging for the CLI."""
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, level_name.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[logging.StreamHandler(sys.stdout)],
    )
    logging.getLogger().setLevel(level)


def _inputs_hash(scenario, inputs) -> str:
    model = inputs.model
    if model is None:
        model_part = None
    elif isinstance(model, GumbelShocks):
        model_part = {"class": "gumbel", "K": model.K, "scale": model.scale}
    else:
        model_part = model_to_dict(model)
    return content_hash({"scenario": scenario.raw, "model": model_part})


def run_scenario(scenario_path: Path, config: Config) -> RunStats:
    """
    Run every analysis of a scenario in order and write its artifacts.

    Args:
        scenario_path: scenario JSON file
        config: configuration object

    Returns:
        RunStats with operation statistics

    Raises:
        ArumError: the first library error; nothing after it runs
    """
    logger = logging.getLogger(__name__)
    stats = RunStats()

    scenario = load_scenario(scenario_path)
    settings = resolve_settings(scenario, config)
    logger.info(f"Scenario '{scenario.name}' ({settings.arithmetic.value} arithmetic, seed {settings.seed})")

    inputs = load_inputs(scenario, settings.arithmetic)
    context = AnalysisContext(inputs=inputs, settings=settings)

    # Compute everything before writing so a failing analysis leaves no partial run.
    results = []
    for spec in scenario.analyses:
        results.append(run_analysis(context, spec))
        stats.analyses_run += 1
        stats.analysis_names.append(spec.name)

    logger.info("")
    logger.info("Writing reports...")
    writer = ReportWriter(settings.output_dir)
    for result in results:
        writer.write_result(result)
    writer.write_manifest({
        "scenario": scenario.name,
        "inputs_hash": _inputs_hash(scenario, inputs),
        "version": __version__,
        "seed": settings.seed,
        "arithmetic": settings.arithmetic.value,
    })

    stats.files_written = sum(1 for r in writer.results if r.changed)
    stats.files_unchanged = sum(1 for r in writer.results if not r.changed)
    stats.output_dir = settings.output_dir
    return stats


def validate_scenario(scenario_path: Path, config: Config) -> None:
    """Parse the scenario and load its inputs without running analyses."""
    logger = logging.getLogger(__name__)
    scenario = load_scenario(scenario_path)
    settings = resolve_settings(scenario, config)
    load_inputs(scenario, settings.arithmetic)
    logger.info(f"Scenario '{scenario.name}' is valid: {len(scenario.analyses)} analysis(es)")


def _log_summary(stats: RunStats) -> None:
    logger = logging.getLogger(__name__)
    logger.info("")
    logger.info("=" * 40)
    logger.info("Run Complete")
    logger.info("=" * 40)
    logger.info(f"Analyses run:    {stats.analyses_run}")
    logger.info(f"Files written:   {stats.files_written}")
    logger.info(f"Files unchanged: {stats.files_unchanged}")
    logger.info("")
    logger.info(f"Output: {stats.output_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    config = load_config(argv)
    setup_logging(config.verbose, config.quiet, config.log_level)
    logger = logging.getLogger(__name__)
    if config.env_file:
        logger.debug(f"Loaded environment from {config.env_file}")

    if config.command == "schema":
        print(json.dumps(SCENARIO_SCHEMA, sort_keys=True, indent=2))
        return 0

    try:
        if config.command == "validate":
            validate_scenario(config.scenario_path, config)
        else:
            _log_summary(run_scenario(config.scenario_path, config))
    except ArumError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        return 1
    return 0
