"""Server options."""

from __future__ import annotations

from dataclasses import dataclass


class AdapterConfigError(ValueError):
    """Raised when a server option is missing or out of range."""


@dataclass(frozen=True)
class AdapterConfig:
    """Validated options for one server process.

    model is either a backend keyword ("mock", "identity") or a checkpoint
    identifier passed through to the transformers backend. A response whose
    top-class probability falls below neutral_threshold is labeled neutral
    regardless of the winning class.
    """

    model: str = "mock"
    max_batch: int = 64
    device: str = "cpu"
    neutral_threshold: float = 0.5

    def __post_init__(self) -> None:
        if not isinstance(self.model, str) or not self.model.strip():
            raise AdapterConfigError("model must be a non-empty string")
        if isinstance(self.max_batch, bool) or not isinstance(self.max_batch, int):
            raise AdapterConfigError("max_batch must be an integer")
        if self.max_batch < 1:
            raise AdapterConfigError(f"max_batch must be >= 1, got {self.max_batch}")
        if not isinstance(self.device, str) or not self.device.strip():
            raise AdapterConfigError("device must be a non-empty string")
        try:
            threshold = float(self.neutral_threshold)
        except (TypeError, ValueError):
            raise AdapterConfigError("neutral_threshold must be a number") from None
        if not 0.0 <= threshold < 1.0:
            raise AdapterConfigError(
                f"neutral_threshold must be in [0, 1), got {self.neutral_threshold}"
            )
        object.__setattr__(self, "neutral_threshold", threshold)
