"""
Configuration management for arum-consideration.

Loads configuration from:
1. .env file (via python-dotenv)
2. Environment variables
3. Command-line arguments (highest priority)

Scenario files sit between the environment and the CLI for the settings
they carry (output_dir, seed, arithmetic); see scenario.resolve_settings.
"""

import argparse
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from .core import ArithmeticMode
from .errors import EXIT_CODES

DEFAULT_OUTPUT_DIR = Path("arum-output")
COMMANDS = ("run", "validate", "schema")


def _load_env() -> Optional[Path]:
    """Load .env from common locations, returning the path if found."""
    script_root = Path(__file__).resolve().parents[1]
    candidates = [
        Path.cwd() / ".env",
        script_root / ".env",
    ]
    for candidate in candidates:
        if candidate.exists():
            load_dotenv(candidate, override=False)
            return candidate
    return None


@dataclass
class Config:
    """Configuration for one CLI invocation."""

    command: str
    scenario_path: Optional[Path] = None

    # Overrides; None means "use the scenario value, then the default"
    output_dir: Optional[Path] = None
    arithmetic: Optional[ArithmeticMode] = None
    seed: Optional[int] = None
    atom_grid: Optional[str] = None

    # Defaults from the environment
    default_output_dir: Path = DEFAULT_OUTPUT_DIR
    default_arithmetic: ArithmeticMode = ArithmeticMode.RATIONAL
    workers: int = 1

    # Runtime options
    verbose: bool = False
    quiet: bool = False
    log_level: str = "INFO"
    env_file: Optional[Path] = None


def parse_arithmetic(value: str) -> ArithmeticMode:
    try:
        return ArithmeticMode(value.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(f"arithmetic must be 'rational' or 'float', got {value!r}")


def parse_seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def _exit_code_epilog() -> str:
    lines = ["Exit codes:", "  0   success", "  1   unexpected error"]
    for name, code in sorted(EXIT_CODES.items(), key=lambda item: item[1]):
        lines.append(f"  {code:<3} {name}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_scenario.py",
        description="Run ARUM / ARUM-E / ARUM-CS analyses declared in a scenario file.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Examples:
  python run_scenario.py run scenarios/reference/scenario.json
  python run_scenario.py run scenario.json --arithmetic float --seed 7
  python run_scenario.py validate scenario.json
  python run_scenario.py schema

Environment Variables:
  ARUM_OUTPUT_DIR      Output directory when neither scenario nor CLI gives one
  ARUM_ARITHMETIC      rational | float, when the scenario does not say
  ARUM_WORKERS         Threads for quadrature and Monte Carlo (default: 1)
  LOG_LEVEL            Logging level (default: INFO)

{_exit_code_epilog()}
""",
    )
    parser.add_argument("command", choices=COMMANDS, help="What to do.")
    parser.add_argument("scenario", nargs="?", help="Scenario JSON file (run, validate).")
    parser.add_argument(
        "--output-dir",
        dest="output_dir",
        help="Output directory. Overrides the scenario and ARUM_OUTPUT_DIR.",
    )
    parser.add_argument(
        "--arithmetic",
        type=parse_arithmetic,
        help="rational or float. Overrides the scenario.",
    )
    parser.add_argument(
        "--seed",
        type=parse_seed,
        help="Monte Carlo seed. Overrides the scenario.",
    )
    parser.add_argument(
        "--atom-grid",
        dest="atom_grid",
        help="Shock values lo:hi:step for counterfactual atom families.",
    )
    parser.add_argument(
        "--quiet", "-q",
        action="store_true",
        help="Only log warnings and errors.",
    )
    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose logging.",
    )
    return parser


def load_config(argv: Optional[List[str]] = None) -> Config:
    """
    Load configuration from .env file, environment variables, and CLI arguments.

    Priority (highest to lowest):
    1. Command-line arguments
    2. Environment variables
    3. .env file
    4. Default values
    """
    env_file = _load_env()

    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command in ("run", "validate") and not args.scenario:
        parser.error(f"'{args.command}' needs a scenario file")
    if args.verbose and args.quiet:
        parser.error("--verbose and --quiet are mutually exclusive")

    env_arithmetic = os.getenv("ARUM_ARITHMETIC")
    try:
        default_arithmetic = (
            parse_arithmetic(env_arithmetic) if env_arithmetic else ArithmeticMode.RATIONAL
        )
    except argparse.ArgumentTypeError as e:
        parser.error(f"ARUM_ARITHMETIC: {e}")

    env_workers = os.getenv("ARUM_WORKERS", "1")
    try:
        workers = int(env_workers)
    except ValueError:
        parser.error(f"ARUM_WORKERS must be an integer, got {env_workers!r}")
    if workers < 1:
        parser.error("ARUM_WORKERS must be at least 1")

    return Config(
        command=args.command,
        scenario_path=Path(args.scenario).expanduser() if args.scenario else None,
        output_dir=Path(args.output_dir).expanduser() if args.output_dir else None,
        arithmetic=args.arithmetic,
        seed=args.seed,
        atom_grid=args.atom_grid,
        default_output_dir=Path(os.getenv("ARUM_OUTPUT_DIR", str(DEFAULT_OUTPUT_DIR))).expanduser(),
        default_arithmetic=default_arithmetic,
        workers=workers,
        verbose=args.verbose,
        quiet=args.quiet,
        log_level=os.getenv("LOG_LEVEL", "INFO").upper(),
        env_file=env_file,
    )
