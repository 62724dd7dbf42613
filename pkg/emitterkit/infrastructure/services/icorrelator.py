"""Module containing correlator service abstractions."""

from abc import ABC, abstractmethod
from typing import Any, Literal, Optional

from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.domain.photons import TimeTagStream


class ICorrelatorService(ABC):
    """A class representing correlator service."""

    @abstractmethod
    def correlate(
        self,
        stream: TimeTagStream,
        bin_width: int,
        max_lag: int,
        mode: Literal["full", "start_stop"] = "full",
        binning: Literal["uniform", "log"] = "uniform",
        n_log_bins: Optional[int] = None,
    ) -> CorrelationHistogram:
        """The abstract histogramming A→B delays.

        Args:
            stream (TimeTagStream): The stream.
            bin_width (int): Bin width in picoseconds.
            max_lag (int): Largest |delay| in picoseconds.
            mode (Literal["full", "start_stop"]): Pairing rule.
            binning (Literal["uniform", "log"]): Bin layout.
            n_log_bins (Optional[int]): Bins per side for log binning.

        Returns:
            CorrelationHistogram: Raw coincidences.
        """

    @abstractmethod
    def normalize_g2(
        self,
        hist: CorrelationHistogram,
        stream: Optional[TimeTagStream] = None,
        method: Literal["analytic", "empirical"] = "analytic",
    ) -> CorrelationHistogram:
        """The abstract normalizing coincidences to g².

        Args:
            hist (CorrelationHistogram): Raw histogram.
            stream (Optional[TimeTagStream]): Source of the count rates.
            method (Literal["analytic", "empirical"]): Normalization rule.

        Returns:
            CorrelationHistogram: Histogram with normalized values.
        """

    @abstractmethod
    def trpl_histogram(
        self,
        stream: TimeTagStream,
        bin_width: int,
        period: Optional[float] = None,
    ) -> DecayHistogram:
        """The abstract histogramming photon delays after the preceding sync.

        Args:
            stream (TimeTagStream): Stream with SYNC tags.
            bin_width (int): Bin width in picoseconds.
            period (Optional[float]): Pulse period in picoseconds.

        Returns:
            DecayHistogram: The decay histogram.
        """

    @abstractmethod
    def export_rows(self, hist: CorrelationHistogram) -> list[dict[str, Any]]:
        """The abstract rendering `bin_center_ps,raw_counts,normalized` rows.

        Args:
            hist (CorrelationHistogram): The histogram.

        Returns:
            list[dict[str, Any]]: One row per bin.
        """
