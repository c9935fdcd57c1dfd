"""Exception types shared by every package in the repo.

The CLI maps these onto its exit-code contract (scripts/cli.py): ConfigError
and friends exit with 2, TrainingDivergenceError with 3.
"""

from typing import Optional


class SusdError(Exception):
    """Base class for all errors raised by this code base."""


class DimensionError(SusdError, ValueError):
    """An array's shape does not match what the receiving component declared."""


class ContractError(SusdError, ValueError):
    """A caller violated an operation's precondition."""


class UnsupportedModeError(SusdError, ValueError):
    """The requested operation is undefined for this skill mode or size."""


class ConfigError(SusdError, ValueError):
    """Invalid experiment configuration. `field_path` is the dotted path of
    the offending field (e.g. "sac.gamma"), or "" when the whole document is
    unreadable.
    """

    def __init__(self, message: str, field_path: str = ""):
        super().__init__(f"{field_path}: {message}" if field_path else message)
        self.field_path = field_path


class TrainingDivergenceError(SusdError, RuntimeError):
    """A loss or gradient went non-finite.

    `parameter` names the offending parameter when the failure was caught in
    the optimizer; `step` / `epoch` locate it in the run.
    """

    def __init__(
        self,
        message: str,
        parameter: Optional[str] = None,
        step: Optional[int] = None,
        epoch: Optional[int] = None,
    ):
        super().__init__(message)
        self.parameter = parameter
        self.step = step
        self.epoch = epoch

    def at_epoch(self, epoch: int) -> "TrainingDivergenceError":
        return TrainingDivergenceError(
            f"epoch {epoch}: {self}", parameter=self.parameter, step=self.step, epoch=epoch
        )
