import numpy as np
import pytest
from numpy.testing import assert_array_equal

from emitterkit.config import AppConfig
from emitterkit.core.domain.histogram import CorrelationHistogram
from emitterkit.core.domain.photons import TimeTagStream
from emitterkit.core.errors import DegenerateNormalization, DomainValidationError, EmptyChannel, MissingSync
from emitterkit.infrastructure.services.correlator import CorrelatorService
from tests.factories import make_stream


def brute_force(a: np.ndarray, b: np.ndarray, half_range: int, bin_width: int) -> np.ndarray:
    n_bins = 2 * half_range // bin_width
    delays = (b[None, :] - a[:, None]).ravel()
    delays = delays[np.abs(delays) <= half_range]
    index = np.minimum((delays + half_range) // bin_width, n_bins - 1)
    return np.bincount(index, minlength=n_bins)


@pytest.fixture
def random_stream() -> TimeTagStream:
    rng = np.random.default_rng(3)
    a = np.sort(rng.integers(0, 10_000_000, 600))
    b = np.sort(rng.integers(0, 10_000_000, 700))
    return make_stream(a, b, 10_000_000)


class TestCorrelate:
    def test_matches_brute_force_pairing(self, correlator_service, random_stream):
        hist = correlator_service.correlate(random_stream, 100, 5000)
        expected = brute_force(random_stream.channel(0), random_stream.channel(1), 5000, 100)

        assert_array_equal(hist.raw_counts, expected)
        assert hist.bin_edges[0] == -5000 and hist.bin_edges[-1] == 5000

    def test_single_start_two_stops(self, correlator_service):
        stream = make_stream([0], [100, 500], 1000)
        hist = correlator_service.correlate(stream, 100, 1000)

        assert hist.raw_counts.size == 20
        assert hist.raw_counts[11] == 1
        assert hist.raw_counts[15] == 1
        assert hist.raw_counts.sum() == 2

    def test_lag_range_rounds_up_to_whole_bins(self, correlator_service):
        hist = correlator_service.correlate(make_stream([0], [1], 10), 100, 950)
        assert hist.lag_range == 1000

    def test_result_does_not_depend_on_chunking(self, random_stream):
        one = CorrelatorService(AppConfig(CORRELATOR_CHUNKS=1)).correlate(random_stream, 100, 5000)
        many = CorrelatorService(AppConfig(CORRELATOR_CHUNKS=16, N_JOBS=2)).correlate(random_stream, 100, 5000)
        assert_array_equal(one.raw_counts, many.raw_counts)

    def test_swapping_channels_mirrors_the_histogram(self, correlator_service):
        rng = np.random.default_rng(5)
        # even starts and odd stops keep delays off the bin edges
        a = np.sort(rng.integers(0, 500_000, 300)) * 2
        b = np.sort(rng.integers(0, 500_000, 300)) * 2 + 1

        forward = correlator_service.correlate(make_stream(a, b, 1_000_001), 100, 20_000)
        backward = correlator_service.correlate(make_stream(b, a, 1_000_001), 100, 20_000)

        assert_array_equal(forward.raw_counts, backward.raw_counts[::-1])

    def test_log_bins_cover_the_same_range(self, correlator_service, random_stream):
        uniform = correlator_service.correlate(random_stream, 100, 6400)
        log = correlator_service.correlate(random_stream, 100, 6400, binning="log", n_log_bins=8)

        assert log.raw_counts.sum() == uniform.raw_counts.sum()
        assert np.all(np.diff(log.bin_edges) > 0)
        assert log.binning == "log"

    def test_start_stop_pairs_each_start_once(self, correlator_service):
        stream = make_stream([0, 10], [100], 1000)
        hist = correlator_service.correlate(stream, 10, 200, mode="start_stop")

        assert hist.raw_counts.sum() == 2
        assert hist.raw_counts[np.searchsorted(hist.bin_edges, 100, side="right") - 1] == 1
        assert hist.raw_counts[np.searchsorted(hist.bin_edges, 90, side="right") - 1] == 1

    def test_empty_channel(self, correlator_service):
        with pytest.raises(EmptyChannel):
            correlator_service.correlate(make_stream([0, 5], [], 10), 1, 5)

    def test_fractional_bin_width_is_rejected(self, correlator_service, random_stream):
        with pytest.raises(DomainValidationError):
            correlator_service.correlate(random_stream, 2.5, 100)


class TestNormalize:
    def test_uncorrelated_streams_normalize_to_one(self, correlator_service):
        rng = np.random.default_rng(11)
        duration = 10_000_000_000
        a = np.sort(rng.integers(0, duration, 20_000))
        b = np.sort(rng.integers(0, duration, 20_000))
        stream = make_stream(a, b, duration)

        hist = correlator_service.normalize_g2(correlator_service.correlate(stream, 100, 50_000), stream)

        assert np.mean(hist.normalized) == pytest.approx(1.0, abs=0.05)
        assert hist.normalization_factor == pytest.approx(20_000 * 20_000 / duration * 100)

    def test_empirical_normalization_sets_the_tails_to_one(self, correlator_service, random_stream):
        hist = correlator_service.normalize_g2(
            correlator_service.correlate(random_stream, 100, 5000), method="empirical",
        )
        n_outer = int(round(0.1 * hist.raw_counts.size))
        tails = np.concatenate((hist.normalized[:n_outer], hist.normalized[-n_outer:]))

        assert np.mean(tails) == pytest.approx(1.0)

    def test_normalization_never_changes_raw_counts(self, correlator_service, random_stream):
        raw = correlator_service.correlate(random_stream, 100, 5000)
        normalized = correlator_service.normalize_g2(raw)
        assert_array_equal(raw.raw_counts, normalized.raw_counts)

    def test_vanishing_rates_are_degenerate(self, correlator_service):
        hist = CorrelationHistogram(bin_edges=[-100, 0, 100], raw_counts=[1, 1], lag_range=100)
        with pytest.raises(DegenerateNormalization):
            correlator_service.normalize_g2(hist)


class TestTrpl:
    def test_delays_after_the_preceding_sync(self, correlator_service):
        stream = make_stream([50, 150], [1600], 3000, sync=[100, 1100, 2100])
        decay = correlator_service.trpl_histogram(stream, 100, period=1000)

        assert decay.counts.size == 10
        assert decay.counts[0] == 1
        assert decay.counts[5] == 1
        assert decay.counts.sum() == 2
        assert decay.n_sync == 3

    def test_period_from_sync_spacing(self, correlator_service):
        stream = make_stream([150], [], 3000, sync=[100, 1100, 2100])
        assert correlator_service.trpl_histogram(stream, 100).period == pytest.approx(1000.0)

    def test_period_from_metadata(self, correlator_service):
        stream = make_stream([150], [], 3000, sync=[100])
        stream.metadata.configs["rep_rate"] = 1e9
        assert correlator_service.trpl_histogram(stream, 100).period == pytest.approx(1000.0)

    def test_stream_without_sync(self, correlator_service):
        with pytest.raises(MissingSync):
            correlator_service.trpl_histogram(make_stream([1], [2], 10), 1)


def test_export_rows(correlator_service):
    hist = correlator_service.normalize_g2(correlator_service.correlate(make_stream([0], [100, 500], 1000), 100, 1000))
    rows = correlator_service.export_rows(hist)

    assert len(rows) == 20
    assert set(rows[0]) == {"bin_center_ps", "raw_counts", "normalized"}
    assert rows[11]["bin_center_ps"] == 150.0


@pytest.mark.slow
def test_thousand_random_streams_match_brute_force(correlator_service):
    rng = np.random.default_rng(2024)

    for _ in range(1000):
        n_tags = int(rng.integers(2, 10_001))
        n_a = int(rng.integers(1, n_tags))
        span = int(rng.integers(1_000, 1_000_000_000))
        bin_width = int(rng.integers(1, 1_000))
        half_range = bin_width * int(rng.integers(1, 200))

        a = np.sort(rng.integers(0, span, n_a))
        b = np.sort(rng.integers(0, span, n_tags - n_a))
        hist = correlator_service.correlate(make_stream(a, b, span), bin_width, half_range)

        expected = sum(brute_force(a[i:i + 500], b, half_range, bin_width) for i in range(0, a.size, 500))
        assert_array_equal(hist.raw_counts, expected)
