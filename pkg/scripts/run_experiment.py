#!/usr/bin/env python3
"""
Experiment CLI Entry Point
==========================
Thin wrapper around the spde-lab command for running from a checkout.

Usage:
    python scripts/run_experiment.py energy --config configs/energy.json
    # or after pip install -e .
    spde-lab energy --config configs/energy.json
"""

import sys
from pathlib import Path

# Add src to path for development
src_path = Path(__file__).parent.parent / "src"
if src_path.exists():
    sys.path.insert(0, str(src_path))

from spde_engine.core.cli import main


if __name__ == "__main__":
    sys.exit(main())
