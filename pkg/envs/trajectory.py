"""Line-delimited JSON trajectory dumps, one record per environment step."""

import json
from pathlib import Path
from typing import Iterable, Iterator, List

from pydantic import BaseModel


class TrajectoryRecord(BaseModel):
    episode: int
    t: int
    z: List[float]
    s: List[float]
    a: List[float]
    s_next: List[float]
    task_reward: float = 0.0


def write_trajectories(path: Path, records: Iterable[TrajectoryRecord]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
            count += 1
    return count


def read_trajectories(path: Path) -> Iterator[TrajectoryRecord]:
    with open(path) as f:
        for line in f:
            if line.strip():
                yield TrajectoryRecord.model_validate(json.loads(line))
