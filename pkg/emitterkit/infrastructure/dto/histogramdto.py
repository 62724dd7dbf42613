"""A module containing DTO models for histograms."""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from emitterkit.config import config
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram

CORRELATION_COLUMNS = ["bin_center_ps", "raw_counts", "normalized"]
DECAY_COLUMNS = ["delay_ps", "counts"]


class CorrelationHistogramDTO(BaseModel):
    """A model representing DTO for a serialized correlation histogram."""
    schema_version: int
    bin_edges_ps: list[float]
    raw_counts: list[int]
    normalized: Optional[list[float]] = None
    normalization_factor: Optional[float] = None
    lag_range_ps: float
    binning: str
    mode: str
    n_a: int
    n_b: int
    duration_ps: int

    model_config = ConfigDict(extra="ignore")

    @classmethod
    def from_histogram(cls, hist: CorrelationHistogram) -> "CorrelationHistogramDTO":
        """A method for preparing DTO instance based on a histogram.

        Args:
            hist (CorrelationHistogram): The histogram.

        Returns:
            CorrelationHistogramDTO: The final DTO instance.
        """

        return cls(
            schema_version=config.SCHEMA_VERSION,
            bin_edges_ps=hist.bin_edges.tolist(),
            raw_counts=hist.raw_counts.tolist(),
            normalized=None if hist.normalized is None else hist.normalized.tolist(),
            normalization_factor=hist.normalization_factor,
            lag_range_ps=hist.lag_range,
            binning=hist.binning,
            mode=hist.mode,
            n_a=hist.n_a,
            n_b=hist.n_b,
            duration_ps=hist.duration,
        )

    def to_histogram(self) -> CorrelationHistogram:
        """A method restoring the domain histogram.

        Returns:
            CorrelationHistogram: The histogram.
        """

        return CorrelationHistogram(
            bin_edges=np.asarray(self.bin_edges_ps),
            raw_counts=np.asarray(self.raw_counts),
            normalized=None if self.normalized is None else np.asarray(self.normalized),
            normalization_factor=self.normalization_factor,
            lag_range=self.lag_range_ps,
            binning=self.binning,
            mode=self.mode,
            n_a=self.n_a,
            n_b=self.n_b,
            duration=self.duration_ps,
        )

    @staticmethod
    def rows(hist: CorrelationHistogram) -> list[dict[str, Any]]:
        """A method rendering `bin_center_ps,raw_counts,normalized` rows.

        Args:
            hist (CorrelationHistogram): The histogram.

        Returns:
            list[dict[str, Any]]: One row per bin.
        """

        normalized = hist.normalized if hist.normalized is not None \
            else np.full(hist.raw_counts.shape, np.nan)
        return [
            {"bin_center_ps": float(center), "raw_counts": int(raw), "normalized": float(value)}
            for center, raw, value in zip(hist.bin_centers, hist.raw_counts, normalized)
        ]


class DecayHistogramDTO(BaseModel):
    """A model representing DTO for a serialized decay histogram."""
    schema_version: int
    bin_edges_ps: list[float]
    counts: list[int]
    n_sync: int
    period_ps: float
    jitter_sigma_ps: float = 0.0

    model_config = ConfigDict(extra="ignore")

    @classmethod
    def from_histogram(cls, hist: DecayHistogram) -> "DecayHistogramDTO":
        """A method for preparing DTO instance based on a decay histogram.

        Args:
            hist (DecayHistogram): The histogram.

        Returns:
            DecayHistogramDTO: The final DTO instance.
        """

        return cls(
            schema_version=config.SCHEMA_VERSION,
            bin_edges_ps=hist.bin_edges.tolist(),
            counts=hist.counts.tolist(),
            n_sync=hist.n_sync,
            period_ps=hist.period,
            jitter_sigma_ps=hist.jitter_sigma,
        )

    def to_histogram(self) -> DecayHistogram:
        """A method restoring the domain histogram.

        Returns:
            DecayHistogram: The histogram.
        """

        return DecayHistogram(
            bin_edges=np.asarray(self.bin_edges_ps),
            counts=np.asarray(self.counts),
            n_sync=self.n_sync,
            period=self.period_ps,
            jitter_sigma=self.jitter_sigma_ps,
        )

    @staticmethod
    def rows(hist: DecayHistogram) -> list[dict[str, Any]]:
        """A method rendering `delay_ps,counts` rows.

        Args:
            hist (DecayHistogram): The histogram.

        Returns:
            list[dict[str, Any]]: One row per bin.
        """

        return [
            {"delay_ps": float(center), "counts": int(count)}
            for center, count in zip(hist.bin_centers, hist.counts)
        ]
