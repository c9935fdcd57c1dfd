from .coverage import (
    BinCoverageReport,
    CoverageReport,
    bin_coverage,
    bin_fraction,
    bins_from_positions,
    coverage_from_positions,
    rollout_positions,
    round_positions,
    state_coverage,
    unique_state_count,
)
from .decoding import HIDDEN_CANDIDATES, DecodeReport, decode_from_features, embedding_features, factor_decode
from .reports import publish, write_csv, write_summary
from .zero_shot import ZeroShotReport, zero_shot_episode, zero_shot_eval

__all__ = [
    "BinCoverageReport",
    "CoverageReport",
    "DecodeReport",
    "HIDDEN_CANDIDATES",
    "ZeroShotReport",
    "bin_coverage",
    "bin_fraction",
    "bins_from_positions",
    "coverage_from_positions",
    "decode_from_features",
    "embedding_features",
    "factor_decode",
    "publish",
    "rollout_positions",
    "round_positions",
    "state_coverage",
    "unique_state_count",
    "write_csv",
    "write_summary",
    "zero_shot_episode",
    "zero_shot_eval",
]
