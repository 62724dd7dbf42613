import numpy as np
import pytest

from emitterkit.config import AppConfig
from emitterkit.core.domain.photons import (
    Channel,
    DetectorConfig,
    EmitterRates,
    ExcitationConfig,
    ExcitationMode,
    IdealTags,
)
from emitterkit.core.errors import CapacityExceeded, DomainValidationError
from emitterkit.core.physics.photophysics import (
    background_rate_for_signal_fraction,
    emission_rate,
    g2_from_rates,
    g2_model,
    saturation_from_rates,
    signal_fraction_for_g2_zero,
)
from emitterkit.infrastructure.services.simulation import SimulationService

TWO_LEVEL = EmitterRates(excitation_rate=1e8, radiative_rate=1e9)
THREE_LEVEL = EmitterRates(excitation_rate=1e8, radiative_rate=1e9, intersystem_rate=1e7, deshelving_rate=1e6)
PULSED = ExcitationConfig(mode=ExcitationMode.PULSED, excitation_probability=0.2)


class TestContinuousWave:
    def test_same_seed_same_records(self, simulation_service):
        first = simulation_service.simulate_cw(THREE_LEVEL, DetectorConfig(), 1e-4, seed=9)
        second = simulation_service.simulate_cw(THREE_LEVEL, DetectorConfig(), 1e-4, seed=9)
        other = simulation_service.simulate_cw(THREE_LEVEL, DetectorConfig(), 1e-4, seed=10)

        assert first.same_records(second)
        assert not first.same_records(other)

    def test_count_rate_follows_the_rate_model(self, simulation_service):
        stream = simulation_service.simulate_cw(THREE_LEVEL, DetectorConfig.ideal(), 1e-2, seed=1)
        detected = (stream.count(Channel.A) + stream.count(Channel.B)) / 1e-2

        assert detected == pytest.approx(emission_rate(THREE_LEVEL), rel=0.05)

    def test_channels_split_evenly(self, simulation_service):
        stream = simulation_service.simulate_cw(TWO_LEVEL, DetectorConfig.ideal(), 1e-3, seed=2)
        assert stream.count(Channel.A) / len(stream) == pytest.approx(0.5, abs=0.01)

    def test_records_are_ordered_and_inside_the_run(self, simulation_service):
        stream = simulation_service.simulate_cw(TWO_LEVEL, DetectorConfig(dark_rate=1e5), 1e-4, seed=3)

        assert np.all(np.diff(stream.timestamps.astype(np.int64)) >= 0)
        assert int(stream.timestamps[-1]) < stream.duration == 100_000_000
        assert stream.metadata.seed == 3
        assert stream.metadata.configs["mode"] == "cw"

    def test_two_level_emitter_antibunches(self, simulation_service, correlator_service):
        stream = simulation_service.simulate_cw(TWO_LEVEL, DetectorConfig.ideal(), 1e-2, seed=4)
        hist = correlator_service.normalize_g2(correlator_service.correlate(stream, 100, 20_000), stream)
        centers = hist.bin_centers

        assert np.max(hist.normalized[np.abs(centers) < 100]) < 0.3
        assert np.mean(hist.normalized[np.abs(centers) > 10_000]) == pytest.approx(1.0, abs=0.05)

    def test_duration_must_be_positive(self, simulation_service):
        with pytest.raises(DomainValidationError):
            simulation_service.simulate_cw(TWO_LEVEL, DetectorConfig(), 0.0, seed=0)

    def test_tag_cap(self):
        service = SimulationService(AppConfig(MAX_TAGS=1000))
        with pytest.raises(CapacityExceeded):
            service.simulate_cw(TWO_LEVEL, DetectorConfig(), 1.0, seed=0)


class TestPulsed:
    def test_one_sync_per_pulse(self, simulation_service):
        stream = simulation_service.simulate_pulsed(TWO_LEVEL, DetectorConfig.ideal(), PULSED, 10_000, seed=5)

        assert stream.count(Channel.SYNC) == 10_000
        assert stream.count(Channel.A) + stream.count(Channel.B) <= 10_000
        assert stream.metadata.configs["rep_rate"] == PULSED.rep_rate

    def test_zero_pulses_give_an_empty_stream(self, simulation_service):
        stream = simulation_service.simulate_pulsed(TWO_LEVEL, DetectorConfig(), PULSED, 0, seed=5)
        assert len(stream) == 0
        assert stream.duration == 0

    def test_decay_recovers_the_radiative_lifetime(self, simulation_service, correlator_service, fitting_service):
        stream = simulation_service.simulate_pulsed(TWO_LEVEL, DetectorConfig.ideal(), PULSED, 200_000, seed=6)
        fit = fitting_service.fit_lifetime(correlator_service.trpl_histogram(stream, 16), n_samples=0)

        assert fit.params["lifetime"] == pytest.approx(1e-9, rel=0.05)

    def test_jittered_decay_is_fitted_past_the_peak(self, simulation_service, correlator_service, fitting_service):
        det = DetectorConfig(efficiency=1.0, dark_rate=0.0, timing_jitter_sigma=200e-12)
        stream = simulation_service.simulate_pulsed(TWO_LEVEL, det, PULSED, 200_000, seed=16)
        decay = correlator_service.trpl_histogram(stream, 16)

        assert decay.jitter_sigma == pytest.approx(200.0)
        peak = decay.bin_edges[int(np.argmax(decay.counts))]
        fit = fitting_service.fit_lifetime(decay, n_samples=0)

        assert fit.n_points == int(np.sum(decay.bin_centers >= peak + 800.0))
        assert fit.params["lifetime"] == pytest.approx(1e-9, rel=0.05)

    def test_cw_source_is_rejected(self, simulation_service):
        with pytest.raises(DomainValidationError):
            simulation_service.simulate_pulsed(
                TWO_LEVEL, DetectorConfig(), ExcitationConfig(mode=ExcitationMode.CW), 10, seed=0,
            )


class TestDetector:
    def test_dead_time_spaces_each_channel(self, simulation_service):
        det = DetectorConfig(efficiency=1.0, dark_rate=0.0, dead_time=20e-9)
        stream = simulation_service.simulate_cw(TWO_LEVEL, det, 1e-4, seed=7)

        for channel in (Channel.A, Channel.B):
            assert np.all(np.diff(stream.channel(channel)) >= 20_000)

    def test_zero_efficiency_leaves_only_syncs(self, simulation_service):
        stream = simulation_service.simulate_pulsed(
            TWO_LEVEL, DetectorConfig(efficiency=0.0, dark_rate=0.0), PULSED, 1000, seed=8,
        )
        assert len(stream) == stream.count(Channel.SYNC) == 1000

    def test_darks_alone_follow_the_dark_rate(self, simulation_service):
        ideal = IdealTags(times=[], channels=[], duration=10**12)
        stream = simulation_service.apply_detector(ideal, DetectorConfig(dark_rate=1e4), seed=9)
        assert stream.count(Channel.A) == pytest.approx(1e4, rel=0.05)

    def test_jitter_keeps_tags_integral_and_sorted(self, simulation_service):
        ideal = IdealTags(times=np.arange(1000) * 1000.0 + 500.0, channels=np.zeros(1000), duration=10**6)
        stream = simulation_service.apply_detector(ideal, DetectorConfig(dark_rate=0.0, timing_jitter_sigma=50e-12),
                                                   seed=10)

        assert stream.timestamps.dtype == np.uint64
        assert np.all(np.diff(stream.timestamps.astype(np.int64)) >= 0)
        assert len(stream) == 1000


def test_saturation_series_rises_with_power(simulation_service):
    series = simulation_service.simulate_saturation_series(
        THREE_LEVEL, DetectorConfig.ideal(), [1e-4, 1e-3, 1e-2], 1e11, 1e-3, seed=11,
    )

    powers, rates = zip(*series)
    assert list(powers) == [1e-4, 1e-3, 1e-2]
    assert rates[0] < rates[1] < rates[2]


@pytest.mark.slow
def test_background_diluted_stream_fits_to_the_target_dip(simulation_service, correlator_service, fitting_service):
    rho = signal_fraction_for_g2_zero(0.33)
    dark = background_rate_for_signal_fraction(emission_rate(THREE_LEVEL) / 2, rho)
    stream = simulation_service.simulate_cw(THREE_LEVEL, DetectorConfig(dark_rate=dark), 2e-2, seed=12)

    hist = correlator_service.normalize_g2(correlator_service.correlate(stream, 200, 3_000_000), stream)
    fit = fitting_service.fit_g2(hist, n_samples=0)

    assert fit.derived["g2_zero"] == pytest.approx(0.33, abs=0.03)


class TestDetectorModel:
    def test_longer_dead_time_never_keeps_more_tags(self, simulation_service):
        rng = np.random.default_rng(20)
        times = np.cumsum(rng.exponential(10_000.0, 100_000))
        ideal = IdealTags(times=times, channels=rng.integers(0, 2, times.size), duration=int(times[-1]) + 1)

        kept = [
            len(simulation_service.apply_detector(ideal, DetectorConfig.ideal().model_copy(
                update={"dead_time": dead_time},
            ), seed=21))
            for dead_time in (0.0, 1e-9, 5e-9, 20e-9, 100e-9)
        ]

        assert kept[0] == times.size
        assert all(later <= earlier for earlier, later in zip(kept, kept[1:]))
        assert kept[-1] < kept[0]

    def test_half_efficiency_is_binomial(self, simulation_service):
        n = 1_000_000
        ideal = IdealTags(times=np.arange(n) * 1000.0, channels=np.zeros(n), duration=n * 1000)
        det = DetectorConfig(efficiency=0.5, dark_rate=0.0, dead_time=0.0)

        kept = len(simulation_service.apply_detector(ideal, det, seed=22))

        assert abs(kept - 0.5 * n) < 5.0 * np.sqrt(0.25 * n)

    def test_silent_emitter_leaves_only_darks(self, simulation_service):
        silent = EmitterRates(excitation_rate=1e6, radiative_rate=1e9, quantum_efficiency=0.0)
        stream = simulation_service.simulate_cw(silent, DetectorConfig(dark_rate=1e4), 0.1, seed=23)

        assert stream.count(Channel.SYNC) == 0
        for channel in (Channel.A, Channel.B):
            assert abs(stream.count(channel) - 1000) < 5.0 * np.sqrt(1000)

    def test_darks_raise_the_dip(self, simulation_service, correlator_service):
        dips = []
        for dark_rate in (0.0, 1.5e7, 4.5e7):
            stream = simulation_service.simulate_cw(TWO_LEVEL, DetectorConfig(dark_rate=dark_rate), 5e-3, seed=24)
            hist = correlator_service.normalize_g2(correlator_service.correlate(stream, 100, 20_000), stream)
            dips.append(float(np.mean(hist.normalized[np.abs(hist.bin_centers) < 100])))

        assert dips[0] < dips[1] < dips[2] < 1.0


def test_shelving_bunches_as_the_rate_model_predicts(simulation_service, correlator_service):
    stream = simulation_service.simulate_cw(THREE_LEVEL, DetectorConfig.ideal(), 1e-2, seed=25)
    hist = correlator_service.normalize_g2(correlator_service.correlate(stream, 1000, 200_000), stream)
    intermediate = (np.abs(hist.bin_centers) > 20_000) & (np.abs(hist.bin_centers) < 100_000)
    predicted = g2_model(hist.bin_centers[intermediate] * 1e-12, g2_from_rates(THREE_LEVEL))

    measured = float(np.mean(hist.normalized[intermediate]))

    assert measured > 1.2
    assert measured == pytest.approx(float(np.mean(predicted)), abs=0.03)


def test_saturation_series_fits_the_predicted_power(simulation_service, fitting_service):
    per_watt = 1e11
    series = simulation_service.simulate_saturation_series(
        THREE_LEVEL, DetectorConfig.ideal(), np.geomspace(1e-5, 1e-1, 9), per_watt, 1e-3, seed=26,
    )
    powers, rates = zip(*series)

    fit = fitting_service.fit_saturation(powers, rates, n_samples=0)

    assert fit.params["sat_power"] == pytest.approx(saturation_from_rates(THREE_LEVEL, per_watt).sat_power, rel=0.1)


@pytest.mark.slow
def test_g2_interval_covers_the_target_dip(simulation_service, correlator_service, fitting_service):
    rates = EmitterRates(excitation_rate=1e8, radiative_rate=1e9, intersystem_rate=1e7, deshelving_rate=1e7)
    rho = signal_fraction_for_g2_zero(0.33)
    dark = background_rate_for_signal_fraction(emission_rate(rates) / 2, rho)
    assert g2_from_rates(rates, signal_fraction=rho).g2_zero == pytest.approx(0.33)

    covered = 0
    for seed in range(100):
        stream = simulation_service.simulate_cw(rates, DetectorConfig(dark_rate=dark), 1e-2, seed=seed)
        hist = correlator_service.normalize_g2(correlator_service.correlate(stream, 200, 600_000), stream)
        lower, upper = fitting_service.fit_g2(hist, n_samples=100, seed=seed).interval("g2_zero")
        covered += lower <= 0.33 <= upper

    assert covered >= 90


@pytest.mark.slow
def test_million_pulses_recover_the_measured_lifetime(simulation_service, correlator_service, fitting_service):
    rates = EmitterRates(excitation_rate=1e8, radiative_rate=1.0 / 1.123e-9)
    stream = simulation_service.simulate_pulsed(rates, DetectorConfig.ideal(), PULSED, 1_000_000, seed=27)

    fit = fitting_service.fit_lifetime(correlator_service.trpl_histogram(stream, 16), n_samples=0)

    assert fit.params["lifetime"] == pytest.approx(1.123e-9, rel=0.02)
