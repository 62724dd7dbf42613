"""Builders of synthetic streams, histograms and spectra for tests."""

import numpy as np

from emitterkit.core.domain.emitter import Peak, ThreeLevelParams
from emitterkit.core.domain.fit import Spectrum
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.domain.photons import Channel, TimeTagStream
from emitterkit.core.physics.photophysics import g2_model, pseudo_voigt


def make_stream(a: np.ndarray, b: np.ndarray, duration: int, sync: np.ndarray = ()) -> TimeTagStream:
    """Merge per-channel picosecond tags into one ordered stream."""
    times = np.concatenate((np.asarray(a), np.asarray(b), np.asarray(sync))).astype(np.int64)
    channels = np.concatenate((
        np.full(len(a), Channel.A),
        np.full(len(b), Channel.B),
        np.full(len(sync), Channel.SYNC),
    )).astype(np.uint8)
    order = np.lexsort((channels, times))
    return TimeTagStream(timestamps=times[order], channels=channels[order], duration=duration)


def make_g2_histogram(
    params: ThreeLevelParams,
    factor: float = 1e4,
    bin_width: int = 100,
    half_range: int = 100_000,
) -> CorrelationHistogram:
    """Noise-free normalized histogram of a three-level g²."""
    edges = np.arange(-half_range, half_range + bin_width, bin_width).astype(np.float64)
    centers = 0.5 * (edges[1:] + edges[:-1])
    raw = np.rint(g2_model(centers * 1e-12, params) * factor).astype(np.int64)
    return CorrelationHistogram(
        bin_edges=edges,
        raw_counts=raw,
        normalized=raw / factor,
        normalization_factor=factor,
        lag_range=float(half_range),
    )


def make_decay(
    lifetime: float, amplitude: float = 1e4, baseline: float = 5.0, jitter_sigma: float = 0.0,
) -> DecayHistogram:
    """Noise-free exponential decay in 16 ps bins, peaking in the first bin."""
    edges = np.arange(0, 20_000 + 16, 16).astype(np.float64)
    centers = 0.5 * (edges[1:] + edges[:-1])
    counts = np.rint(amplitude * np.exp(-centers * 1e-12 / lifetime) + baseline)
    return DecayHistogram(
        bin_edges=edges, counts=counts.astype(np.int64), n_sync=10_000, period=48_076.9, jitter_sigma=jitter_sigma,
    )


def make_spectrum(peaks: list[Peak], baseline: float = 10.0) -> Spectrum:
    """Noise-free spectrum over 560-640 nm in 0.1 nm steps."""
    wavelength = np.linspace(560e-9, 640e-9, 801)
    counts = np.full(wavelength.shape, baseline)
    for peak in peaks:
        counts = counts + pseudo_voigt(wavelength, peak)
    return Spectrum(wavelength=wavelength, counts=counts)
