"""Run the acceptance configuration through the CLI and print a summary.

Usage: ``python scripts/run_acceptance.py [--out report.json] [--jobs 4]``.
Exit status follows the CLI: 0 when every gated check passes.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from unischlesinger.cli import main

CONFIG = Path(__file__).resolve().parent / "configs" / "acceptance.json"


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("acceptance_report.json"))
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)
    return main(["run", str(CONFIG), "--out", str(args.out), "--jobs", str(args.jobs)])


if __name__ == "__main__":
    sys.exit(run())
