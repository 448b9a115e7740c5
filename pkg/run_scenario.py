#!/usr/bin/env python3
"""
arum-consideration: run ARUM / ARUM-E / ARUM-CS analyses from a scenario file.

Usage:
    python run_scenario.py run SCENARIO.json [options]
    python run_scenario.py validate SCENARIO.json
    python run_scenario.py schema

Options:
    --output-dir DIR         Output directory (overrides scenario and ARUM_OUTPUT_DIR)
    --arithmetic MODE        rational or float (overrides the scenario)
    --seed N                 Monte Carlo seed (overrides the scenario)
    --atom-grid LO:HI:STEP   Shock values for counterfactual atom families
    --quiet, -q              Only log warnings and errors
    --verbose, -v            Enable verbose logging

Environment Variables:
    ARUM_OUTPUT_DIR          Default output directory
    ARUM_ARITHMETIC          Default arithmetic mode
    ARUM_WORKERS             Threads for quadrature and Monte Carlo
    LOG_LEVEL                Logging level (default: INFO)

See README.md for full documentation.
"""

import sys

from arum_consideration.cli import main

if __name__ == "__main__":
    sys.exit(main())
