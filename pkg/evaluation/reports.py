"""Report files for evaluation runs: one CSV per report plus a JSON
summary, both written atomically."""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List

import pandas as pd

logger = logging.getLogger(__name__)


def write_csv(rows: Iterable[Dict[str, Any]], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".csv.tmp")
    pd.DataFrame(list(rows)).to_csv(tmp, index=False)
    tmp.replace(path)
    return path


def write_summary(summary: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"completed_at": datetime.now(timezone.utc).isoformat(), **summary}
    tmp = path.with_suffix(".json.tmp")
    with open(tmp, "w") as f:
        json.dump(payload, f, indent=2, default=str)
    tmp.replace(path)
    return path


def summary_lines(kind: str, summary: Dict[str, Any]) -> List[str]:
    lines = [f"{kind} report"]
    for key, value in summary.items():
        if isinstance(value, float):
            lines.append(f"  {key}: {value:.6g}")
        elif isinstance(value, dict):
            lines.append(f"  {key}:")
            lines.extend(f"    {k}: {v:.6g}" if isinstance(v, float) else f"    {k}: {v}" for k, v in value.items())
        else:
            lines.append(f"  {key}: {value}")
    return lines


def publish(kind: str, rows: Iterable[Dict[str, Any]], summary: Dict[str, Any], out_dir: Path) -> Dict[str, Path]:
    """CSV + JSON summary under `out_dir`, and the summary printed to stdout."""
    out_dir = Path(out_dir)
    paths = {
        "csv": write_csv(rows, out_dir / f"{kind}.csv"),
        "summary": write_summary({"kind": kind, **summary}, out_dir / f"{kind}_summary.json"),
    }
    for line in summary_lines(kind, summary):
        print(line)
    logger.info("%s report written to %s", kind, paths["csv"])
    return paths
