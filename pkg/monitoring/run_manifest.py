import json
import subprocess
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional

from pydantic import BaseModel, Field

MANIFEST_FILE = "run_manifest.json"


def code_version() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True, timeout=5, check=True
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


class RunManifest(BaseModel):
    command: str
    config_hash: str
    seed: int
    code_version: str = Field(default_factory=code_version)
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    n_factors: Optional[int] = None
    artifacts: Dict[str, str] = Field(default_factory=dict)

    def add_artifact(self, name: str, path: Path) -> None:
        self.artifacts[name] = str(path)

    def write(self, run_dir: Path) -> Path:
        path = Path(run_dir) / MANIFEST_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(self.model_dump_json(indent=2))
        tmp.replace(path)
        return path

    @classmethod
    def read(cls, run_dir: Path) -> "RunManifest":
        with open(Path(run_dir) / MANIFEST_FILE) as f:
            return cls.model_validate(json.load(f))
