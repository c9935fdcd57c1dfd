from .metrics_writer import MetricsWriter
from .run_logger import EVENTS_NAME, RunLogger, read_events
from .run_manifest import MANIFEST_FILE, RunManifest

__all__ = ["EVENTS_NAME", "MANIFEST_FILE", "MetricsWriter", "RunLogger", "RunManifest", "read_events"]
