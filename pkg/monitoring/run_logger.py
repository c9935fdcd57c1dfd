import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

EVENTS_NAME = "events.jsonl"


class RunLogger:
    """Run-level event log: one JSON object per line in `<run_dir>/events.jsonl`."""

    def __init__(self, run_dir: Path, name: Optional[str] = None):
        self.path = Path(run_dir) / EVENTS_NAME
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.logger = logging.getLogger(name or f"susd.events.{self.path.parent.resolve()}")
        self.logger.propagate = False
        self.logger.setLevel(logging.INFO)
        if not self.logger.handlers:
            handler = logging.FileHandler(self.path)
            handler.setFormatter(logging.Formatter("%(message)s"))
            self.logger.addHandler(handler)

    def log_event(self, event_type: str, **payload: Any) -> Dict[str, Any]:
        entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "event_type": event_type,
            **payload,
        }
        self.logger.info(json.dumps(entry, default=_jsonable))
        return entry

    def run_started(self, command: str, config_hash: str, seed: int):
        return self.log_event("run_started", command=command, config_hash=config_hash, seed=seed)

    def epoch_completed(self, epoch: int, metrics: Dict[str, Any]):
        return self.log_event("epoch_completed", epoch=epoch, metrics=metrics)

    def checkpoint_saved(self, epoch: int, path: Path):
        return self.log_event("checkpoint_saved", epoch=epoch, path=str(path))

    def divergence(self, message: str, epoch: Optional[int] = None, step: Optional[int] = None):
        return self.log_event("divergence", message=message, epoch=epoch, step=step)

    def downstream_epoch(self, seed: int, epoch: int, mean_return: float):
        return self.log_event("downstream_epoch", seed=seed, epoch=epoch, mean_return=mean_return)

    def eval_completed(self, kind: str, summary: Dict[str, Any]):
        return self.log_event("eval_completed", kind=kind, summary=summary)

    def close(self) -> None:
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)


def read_events(run_dir: Path) -> List[Dict[str, Any]]:
    path = Path(run_dir) / EVENTS_NAME
    if not path.exists():
        return []
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def _jsonable(value: Any):
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)
