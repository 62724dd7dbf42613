"""Module containing histogram domain models."""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from emitterkit.core.domain.arrays import FloatArray, IntArray


class CorrelationHistogram(BaseModel):
    """Model representing a cross-correlation histogram of A/B tags.

    Edges are picoseconds of delay t_B − t_A.
    """
    bin_edges: FloatArray
    raw_counts: IntArray
    normalized: Optional[FloatArray] = None
    normalization_factor: Optional[float] = None
    lag_range: float = Field(gt=0)
    binning: Literal["uniform", "log"] = "uniform"
    mode: Literal["full", "start_stop"] = "full"
    n_a: int = 0
    n_b: int = 0
    duration: int = 0

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="ignore")

    @model_validator(mode="after")
    def _check_bins(self) -> "CorrelationHistogram":
        self.bin_edges = np.asarray(self.bin_edges, dtype=np.float64)
        self.raw_counts = np.asarray(self.raw_counts, dtype=np.int64)

        if self.raw_counts.size != self.bin_edges.size - 1:
            raise ValueError("raw_counts must have one entry less than bin_edges")
        if self.normalized is not None:
            self.normalized = np.asarray(self.normalized, dtype=np.float64)
            if self.normalized.shape != self.raw_counts.shape:
                raise ValueError("normalized must match raw_counts")
        if self.normalization_factor is not None and self.normalization_factor <= 0:
            raise ValueError("normalization factor must be positive")
        return self

    @property
    def bin_centers(self) -> np.ndarray:
        """np.ndarray: Bin centers in picoseconds."""
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def bin_widths(self) -> np.ndarray:
        """np.ndarray: Bin widths in picoseconds."""
        return np.diff(self.bin_edges)

    @property
    def bin_width(self) -> float:
        """float: Width of the first bin (the width for uniform bins)."""
        return float(self.bin_edges[1] - self.bin_edges[0])


class DecayHistogram(BaseModel):
    """Model representing photon delays after the preceding sync pulse.

    Delays and `jitter_sigma` (detector timing jitter) are in picoseconds.
    """
    bin_edges: FloatArray
    counts: IntArray
    n_sync: int = Field(ge=0)
    period: float = Field(gt=0)
    jitter_sigma: float = Field(default=0.0, ge=0)

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="ignore")

    @model_validator(mode="after")
    def _check_bins(self) -> "DecayHistogram":
        self.bin_edges = np.asarray(self.bin_edges, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)

        if self.counts.size != self.bin_edges.size - 1:
            raise ValueError("counts must have one entry less than bin_edges")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if self.bin_edges[0] < 0 or self.bin_edges[-1] - self.bin_edges[0] > self.period + 1e-6:
            raise ValueError("decay bins must span at most one pulse period")
        return self

    @property
    def bin_centers(self) -> np.ndarray:
        """np.ndarray: Bin centers in picoseconds after sync."""
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def bin_width(self) -> float:
        """float: Bin width in picoseconds."""
        return float(self.bin_edges[1] - self.bin_edges[0])
