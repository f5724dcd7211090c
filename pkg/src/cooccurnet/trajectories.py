"""Time-indexed scalar series of a network measure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class MeasureTrajectory:
    """A scalar measure evaluated at a sequence of window center months."""

    centers: tuple[int, ...]
    values: np.ndarray
    label: str
    standardized: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.centers),):
            raise DataError("trajectory values must align with centers")
        if any(b <= a for a, b in zip(self.centers, self.centers[1:])):
            raise DataError("trajectory centers must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DataError(f"trajectory {self.label!r} contains non-finite values")

    def __len__(self) -> int:
        return len(self.centers)
