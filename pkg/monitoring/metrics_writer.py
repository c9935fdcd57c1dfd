import logging
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd

logger = logging.getLogger(__name__)


class MetricsWriter:
    """Append-only CSV of one row per epoch.

    Rows are buffered and the whole file is rewritten on flush, so columns
    added by later epochs (new per-factor keys) still line up.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self.rows: List[Dict[str, Any]] = []

    def append(self, row: Dict[str, Any]) -> None:
        if self.rows and row.get("epoch", 0) <= self.rows[-1].get("epoch", -1):
            raise ValueError(f"metrics rows must be monotone in epoch; got {row.get('epoch')} after {self.rows[-1].get('epoch')}")
        self.rows.append(dict(row))

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def flush(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".csv.tmp")
        self.frame().to_csv(tmp, index=False)
        tmp.replace(self.path)
        return self.path
