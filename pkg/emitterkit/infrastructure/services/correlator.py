"""Module containing correlator service implementation."""

import logging
import math
from typing import Any, Literal, Optional

import numpy as np
from joblib import Parallel, delayed

from emitterkit.config import AppConfig
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.domain.photons import PS_PER_S, Channel, TimeTagStream
from emitterkit.core.errors import (
    DegenerateNormalization,
    DomainValidationError,
    EmptyChannel,
    MissingSync,
)
from emitterkit.infrastructure.dto.histogramdto import CorrelationHistogramDTO
from emitterkit.infrastructure.services.icorrelator import ICorrelatorService
from emitterkit.infrastructure.utils.kernels import (
    correlate_edges,
    correlate_uniform,
    start_stop_delays,
)

logger = logging.getLogger(__name__)

DEFAULT_LOG_BINS = 32
OUTER_FRACTION = 0.2


class CorrelatorService(ICorrelatorService):
    """A class implementing the correlator service."""

    _config: AppConfig

    def __init__(self, config: AppConfig) -> None:
        """The initializer of the `correlator service`.

        Args:
            config (AppConfig): The toolkit configuration.
        """

        self._config = config

    def correlate(
        self,
        stream: TimeTagStream,
        bin_width: int,
        max_lag: int,
        mode: Literal["full", "start_stop"] = "full",
        binning: Literal["uniform", "log"] = "uniform",
        n_log_bins: Optional[int] = None,
    ) -> CorrelationHistogram:
        """The method histogramming A→B delays.

        Edges run from −L to L with L = ceil(max_lag / bin_width)·bin_width.
        Bins are half-open [lo, hi) except the last, which is closed.
        Channel A is split into chunks correlated against all of B, so
        the result does not depend on the chunking.

        Args:
            stream (TimeTagStream): The stream.
            bin_width (int): Bin width in whole picoseconds.
            max_lag (int): Largest |delay| in picoseconds.
            mode (Literal["full", "start_stop"]): Pairing rule.
            binning (Literal["uniform", "log"]): Bin layout.
            n_log_bins (Optional[int]): Bins per side for log binning.

        Raises:
            DomainValidationError: On invalid binning.
            EmptyChannel: When A or B holds no tag.

        Returns:
            CorrelationHistogram: Raw coincidences.
        """

        if bin_width < 1 or int(bin_width) != bin_width:
            raise DomainValidationError("bin width must be a positive whole picosecond", bin_width=bin_width)
        if max_lag < bin_width:
            raise DomainValidationError("max_lag must span at least one bin", max_lag=max_lag)

        bin_width = int(bin_width)
        a = stream.channel(Channel.A)
        b = stream.channel(Channel.B)
        for channel, tags in ((Channel.A, a), (Channel.B, b)):
            if tags.size == 0:
                raise EmptyChannel(f"channel {channel.name} holds no tag", channel=channel.name)

        half_range = int(math.ceil(max_lag / bin_width)) * bin_width
        edges = self._edges(half_range, bin_width, binning, n_log_bins)

        if mode == "start_stop":
            counts = self._histogram(start_stop_delays(a, b, half_range), edges)
        else:
            chunks = np.array_split(a, max(1, min(self._config.CORRELATOR_CHUNKS, a.size)))
            if binning == "uniform":
                parts = Parallel(n_jobs=self._config.N_JOBS, prefer="threads")(
                    delayed(correlate_uniform)(chunk, b, half_range, bin_width) for chunk in chunks
                )
            else:
                parts = Parallel(n_jobs=self._config.N_JOBS, prefer="threads")(
                    delayed(correlate_edges)(chunk, b, edges) for chunk in chunks
                )
            counts = np.sum(parts, axis=0)

        hist = CorrelationHistogram(
            bin_edges=edges,
            raw_counts=counts,
            lag_range=float(half_range),
            binning=binning,
            mode=mode,
            n_a=int(a.size),
            n_b=int(b.size),
            duration=stream.duration,
        )

        logger.info(
            "correlated %d x %d tags into %d bins, %d coincidences",
            a.size, b.size, counts.size, int(counts.sum()),
        )
        return hist

    def normalize_g2(
        self,
        hist: CorrelationHistogram,
        stream: Optional[TimeTagStream] = None,
        method: Literal["analytic", "empirical"] = "analytic",
    ) -> CorrelationHistogram:
        """The method normalizing coincidences to g².

        Analytic normalization divides by the accidental coincidences
        N_A·N_B·Δt/T expected per bin. Empirical normalization divides by
        the mean of the outer 20% of bins. Background is never subtracted.
        Log bins are divided per unit width.

        Args:
            hist (CorrelationHistogram): Raw histogram.
            stream (Optional[TimeTagStream]): Source of the count rates,
                the histogram's own counts when absent.
            method (Literal["analytic", "empirical"]): Normalization rule.

        Raises:
            DegenerateNormalization: For zero rates or empty tails.

        Returns:
            CorrelationHistogram: Histogram with normalized values.
        """

        widths = hist.bin_widths
        reference_width = hist.bin_width if hist.binning == "uniform" else 1.0

        if method == "analytic":
            if stream is not None:
                n_a, n_b, duration = stream.count(Channel.A), stream.count(Channel.B), stream.duration
            else:
                n_a, n_b, duration = hist.n_a, hist.n_b, hist.duration
            if n_a == 0 or n_b == 0 or duration == 0:
                raise DegenerateNormalization("count rates vanish", n_a=n_a, n_b=n_b, duration=duration)
            density = n_a * n_b / duration
        else:
            n_outer = max(1, int(round(0.5 * OUTER_FRACTION * widths.size)))
            density_per_bin = hist.raw_counts / widths
            density = float(np.mean(np.concatenate((density_per_bin[:n_outer], density_per_bin[-n_outer:]))))
            if density <= 0:
                raise DegenerateNormalization("outer bins hold no coincidence")

        if hist.mode == "start_stop" and method == "analytic":
            logger.warning("analytic normalization of a start-stop histogram is biased at high rates")

        normalized = hist.raw_counts / (density * widths)
        result = CorrelationHistogram(
            **hist.model_dump(exclude={"normalized", "normalization_factor"}),
            normalized=normalized,
            normalization_factor=density * reference_width,
        )

        logger.info("normalized g2 (%s), factor %.6g", method, result.normalization_factor)
        return result

    def trpl_histogram(
        self,
        stream: TimeTagStream,
        bin_width: int,
        period: Optional[float] = None,
    ) -> DecayHistogram:
        """The method histogramming photon delays after the preceding sync.

        Photons before the first sync are discarded. The period falls back
        to the stream's repetition rate, then to the median sync spacing. The
        detector timing jitter recorded with the stream is carried along.

        Args:
            stream (TimeTagStream): Stream with SYNC tags.
            bin_width (int): Bin width in picoseconds.
            period (Optional[float]): Pulse period in picoseconds.

        Raises:
            MissingSync: When the stream carries no SYNC tag.
            DomainValidationError: When no period can be determined.

        Returns:
            DecayHistogram: The decay histogram over [0, period).
        """

        if bin_width < 1:
            raise DomainValidationError("bin width must be positive", bin_width=bin_width)

        sync = stream.channel(Channel.SYNC)
        if sync.size == 0:
            raise MissingSync("stream carries no SYNC tag")

        period = self._period(stream, sync, period)
        n_bins = int(period // bin_width)
        if n_bins < 1:
            raise DomainValidationError("bin width exceeds the pulse period", period=period)

        photons = stream.timestamps[stream.channels != Channel.SYNC].astype(np.int64)
        preceding = np.searchsorted(sync, photons, side="right") - 1
        valid = preceding >= 0
        delays = photons[valid] - sync[preceding[valid]]
        delays = delays[delays < n_bins * bin_width]

        counts = np.bincount(delays // bin_width, minlength=n_bins)[:n_bins]
        hist = DecayHistogram(
            bin_edges=np.arange(n_bins + 1, dtype=np.float64) * bin_width,
            counts=counts,
            n_sync=int(sync.size),
            period=float(period),
            jitter_sigma=self._jitter(stream),
        )

        logger.info("trpl histogram: %d photons after %d syncs", int(counts.sum()), sync.size)
        return hist

    def export_rows(self, hist: CorrelationHistogram) -> list[dict[str, Any]]:
        """The method rendering `bin_center_ps,raw_counts,normalized` rows.

        Args:
            hist (CorrelationHistogram): The histogram.

        Returns:
            list[dict[str, Any]]: One row per bin.
        """

        return CorrelationHistogramDTO.rows(hist)

    @staticmethod
    def _edges(half_range: int, bin_width: int, binning: str, n_log_bins: Optional[int]) -> np.ndarray:
        if binning == "uniform":
            return np.arange(-half_range, half_range + bin_width, bin_width).astype(np.float64)

        n_side = n_log_bins or DEFAULT_LOG_BINS
        if n_side < 2:
            raise DomainValidationError("log binning needs at least two bins per side", n_log_bins=n_side)
        positive = np.geomspace(bin_width, half_range, n_side)
        return np.concatenate((-positive[::-1], positive))

    @staticmethod
    def _histogram(delays: np.ndarray, edges: np.ndarray) -> np.ndarray:
        n_bins = edges.size - 1
        index = np.searchsorted(edges, delays.astype(np.float64), side="right") - 1
        index[index == n_bins] = n_bins - 1
        index = index[(index >= 0) & (index < n_bins)]
        return np.bincount(index, minlength=n_bins)

    @staticmethod
    def _period(stream: TimeTagStream, sync: np.ndarray, period: Optional[float]) -> float:
        if period is not None:
            return float(period)

        rep_rate = stream.metadata.configs.get("rep_rate")
        if rep_rate:
            return PS_PER_S / float(rep_rate)
        if sync.size >= 2:
            return float(np.median(np.diff(sync)))

        raise DomainValidationError("pulse period unknown for a single sync")

    @staticmethod
    def _jitter(stream: TimeTagStream) -> float:
        detector = stream.metadata.configs.get("detector") or {}
        return float(detector.get("timing_jitter_sigma", 0.0)) * PS_PER_S
