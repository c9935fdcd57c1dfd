"""
Validate a run directory.
Usage: python -m validation.run_checks RUN_DIR
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List

import pandas as pd

from monitoring.run_logger import read_events
from monitoring.run_manifest import MANIFEST_FILE, RunManifest
from validation.schemas import CurveSchema, MetricsSchema

logger = logging.getLogger(__name__)


def check_run_dir(run_dir: Path) -> List[str]:
    run_dir = Path(run_dir)
    errors: List[str] = []

    manifests = list(run_dir.glob(MANIFEST_FILE))
    if len(manifests) != 1:
        errors.append(f"expected exactly one {MANIFEST_FILE}, found {len(manifests)}")
    else:
        try:
            RunManifest.read(run_dir)
        except Exception as e:
            errors.append(f"manifest does not parse: {e}")

    metrics = run_dir / "metrics.csv"
    if metrics.exists():
        try:
            frame = pd.read_csv(metrics)
            MetricsSchema.validate(frame)
            if not frame["epoch"].is_monotonic_increasing:
                errors.append("metrics epochs are not monotone")
        except Exception as e:
            errors.append(f"metrics schema validation failed: {e}")

    for curve in sorted(run_dir.glob("curve_seed*.csv")):
        try:
            CurveSchema.validate(pd.read_csv(curve))
        except Exception as e:
            errors.append(f"{curve.name} schema validation failed: {e}")

    try:
        read_events(run_dir)
    except ValueError as e:
        errors.append(f"events log is not valid JSON lines: {e}")
    return errors


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO)
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dir", type=Path)
    args = parser.parse_args(argv)

    logger.info("=" * 60)
    logger.info("RUN DIRECTORY CHECKS: %s", args.run_dir)
    logger.info("=" * 60)
    errors = check_run_dir(args.run_dir)
    for error in errors:
        logger.error(f"  - {error}")
    if errors:
        logger.warning(f"⚠ {len(errors)} validation issues found")
        return 1
    logger.info("✓ All validation checks passed!")
    return 0


if __name__ == "__main__":
    sys.exit(main())
