import numpy as np
import pytest

from emitterkit.config import AppConfig
from emitterkit.core.domain.emitter import LineshapeParams, Peak, ThreeLevelParams
from emitterkit.core.domain.fit import CurveData, FitResult, NoiseModel, Spectrum
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.errors import (
    DegenerateDesign,
    DegenerateFitWarning,
    DomainValidationError,
    EmptyDecay,
    EmptySpectrum,
    InsufficientSamples,
    NotConverged,
)
from emitterkit.core.physics.curves import DecayModel, PowerLawModel
from emitterkit.core.physics.photophysics import g2_model, pseudo_voigt
from emitterkit.infrastructure.services.fitting import FittingService, classify_alpha
from tests.factories import make_decay, make_g2_histogram, make_spectrum


class TestG2:
    def test_recovers_three_level_parameters(self, fitting_service, g2_params):
        fit = fitting_service.fit_g2(make_g2_histogram(g2_params), n_samples=0)

        assert fit.params["antibunch_amp"] == pytest.approx(0.8, rel=1e-2)
        assert fit.params["bunch_amp"] == pytest.approx(0.1, rel=1e-2)
        assert fit.params["excited_lifetime"] == pytest.approx(2e-9, rel=1e-2)
        assert fit.params["shelving_lifetime"] == pytest.approx(20e-9, rel=1e-2)
        assert fit.derived["g2_zero"] == pytest.approx(0.3, abs=1e-2)
        assert fit.converged

    def test_explicit_start(self, fitting_service, g2_params):
        fit = fitting_service.fit_g2(make_g2_histogram(g2_params), init=g2_params, n_samples=0)
        assert fit.params["delay_offset"] == pytest.approx(0.0, abs=1e-11)

    def test_unnormalized_histogram_is_rejected(self, fitting_service, g2_params):
        hist = make_g2_histogram(g2_params)
        raw = CorrelationHistogram(bin_edges=hist.bin_edges, raw_counts=hist.raw_counts, lag_range=hist.lag_range)
        with pytest.raises(DomainValidationError):
            fitting_service.fit_g2(raw)

    def test_short_histogram_is_rejected(self, fitting_service, g2_params):
        with pytest.raises(DomainValidationError):
            fitting_service.fit_g2(make_g2_histogram(g2_params, half_range=400), n_samples=0)

    def test_bootstrap_below_the_minimum(self, fitting_service, g2_params):
        with pytest.raises(InsufficientSamples):
            fitting_service.fit_g2(make_g2_histogram(g2_params), n_samples=50)


class TestLifetime:
    def test_recovers_the_lifetime(self, fitting_service):
        fit = fitting_service.fit_lifetime(make_decay(2e-9), n_samples=0)

        assert fit.model_id == "single_exponential"
        assert fit.params["lifetime"] == pytest.approx(2e-9, rel=1e-3)
        assert fit.params["baseline"] == pytest.approx(5.0, abs=0.5)

    def test_default_window_clears_the_jitter(self, fitting_service):
        fit = fitting_service.fit_lifetime(make_decay(2e-9, jitter_sigma=250.0), n_samples=0)

        # 4σ = 1000 ps: the first 62 of 1250 bins are skipped
        assert fit.n_points == 1188
        assert fit.params["amplitude"] == pytest.approx(1e4 * np.exp(-0.5), rel=1e-3)
        assert fit.params["lifetime"] == pytest.approx(2e-9, rel=1e-3)

    def test_explicit_window(self, fitting_service):
        fit = fitting_service.fit_lifetime(make_decay(2e-9), fit_window=(1000.0, 15_000.0), n_samples=0)
        assert fit.params["lifetime"] == pytest.approx(2e-9, rel=1e-3)

    def test_window_outside_the_histogram(self, fitting_service):
        with pytest.raises(DomainValidationError):
            fitting_service.fit_lifetime(make_decay(2e-9), fit_window=(0.0, 30_000.0), n_samples=0)

    def test_empty_histogram(self, fitting_service):
        with pytest.raises(EmptyDecay):
            fitting_service.fit_lifetime(make_decay(1e-9, amplitude=0.0, baseline=0.0))

    def test_flat_histogram_falls_back_to_the_baseline(self, fitting_service):
        with pytest.raises(NotConverged) as error:
            fitting_service.fit_lifetime(make_decay(1e-9, amplitude=0.0, baseline=50.0), n_samples=0)

        best = error.value.best_so_far
        assert best.model_id == "constant"
        assert best.params["baseline"] == pytest.approx(50.0)

    def test_bootstrap_is_reproducible(self, fitting_service):
        decay = make_decay(2e-9)
        first = fitting_service.fit_lifetime(decay, n_samples=100, seed=4)
        second = fitting_service.fit_lifetime(decay, n_samples=100, seed=4)

        assert first.ci95 == second.ci95
        assert first.n_mc_samples == 100
        lower, upper = first.ci95["lifetime"]
        assert lower <= first.params["lifetime"] <= upper

    def test_bootstrap_does_not_depend_on_workers(self, fitting_service):
        decay = make_decay(2e-9)
        threaded = FittingService(AppConfig(MIN_MC_SAMPLES=100, N_JOBS=2))

        assert threaded.fit_lifetime(decay, n_samples=100, seed=4).ci95 == \
            fitting_service.fit_lifetime(decay, n_samples=100, seed=4).ci95


class TestSaturation:
    def test_recovers_saturation_parameters(self, fitting_service):
        powers = np.geomspace(1e-5, 1e-1, 12)
        intensities = 1e6 * powers / (powers + 1e-3) + 100.0

        fit = fitting_service.fit_saturation(powers, intensities, n_samples=0)

        assert fit.params["sat_power"] == pytest.approx(1e-3, rel=1e-4)
        assert fit.params["sat_intensity"] == pytest.approx(1e6, rel=1e-4)
        assert fit.params["dark_intensity"] == pytest.approx(100.0, rel=1e-2)
        assert 0.0 < fit.derived["alpha"] < 1.0
        assert fit.classification in {"defect", "free_exciton"}

    def test_needs_four_distinct_powers(self, fitting_service):
        with pytest.raises(DegenerateDesign):
            fitting_service.fit_saturation([1e-4, 1e-3, 1e-2, 1e-2], [1.0, 2.0, 3.0, 3.0])

    def test_negative_power_is_rejected(self, fitting_service):
        with pytest.raises(DomainValidationError):
            fitting_service.fit_saturation([-1.0, 1.0, 2.0, 3.0], [1.0, 2.0, 3.0, 4.0])


class TestPowerLaw:
    @pytest.mark.parametrize("alpha, expected", [
        (0.35, "defect"),
        (1.0, "free_exciton"),
        (2.0, "biexciton"),
        (1.5, "unclassified"),
    ])
    def test_slope_sets_the_class(self, fitting_service, alpha, expected):
        powers = np.geomspace(1e-5, 1e-3, 6)
        fit = fitting_service.fit_power_law(powers, 3e8 * powers**alpha)

        assert fit.params["slope"] == pytest.approx(alpha, abs=1e-9)
        assert fit.classification == expected

    def test_single_power_is_degenerate(self, fitting_service):
        with pytest.raises(DegenerateDesign):
            fitting_service.fit_power_law([1e-3, 1e-3], [5.0, 6.0])

    @pytest.mark.parametrize("alpha, expected", [(0.96, "free_exciton"), (0.94, "defect"), (2.04, "biexciton")])
    def test_tolerance_bands(self, alpha, expected):
        assert classify_alpha(alpha, 0.05) == expected


class TestSpectrum:
    def test_single_peak(self, fitting_service):
        s = make_spectrum([Peak(center=600e-9, fwhm=2e-9, area=1000e-9)])
        fit = fitting_service.fit_spectrum(s, 1, n_samples=0)

        assert fit.params["peak0_center"] == pytest.approx(600e-9, abs=1e-13)
        assert fit.params["peak0_fwhm"] == pytest.approx(2e-9, rel=1e-3)
        assert fit.params["peak0_area"] == pytest.approx(1000e-9, rel=1e-3)
        assert fit.derived["peak0_height"] == pytest.approx(2 / np.pi * 500, rel=1e-3)
        assert fit.params["baseline"] == pytest.approx(10.0, rel=1e-2)
        assert not fit.warnings

    def test_two_peaks_come_back_sorted(self, fitting_service):
        s = make_spectrum([
            Peak(center=610e-9, fwhm=2e-9, area=500e-9),
            Peak(center=590e-9, fwhm=3e-9, area=1000e-9),
        ])
        fit = fitting_service.fit_spectrum(s, 2, n_samples=0)

        assert fit.params["peak0_center"] == pytest.approx(590e-9, abs=1e-12)
        assert fit.params["peak1_center"] == pytest.approx(610e-9, abs=1e-12)
        assert fit.params["peak0_fwhm"] == pytest.approx(3e-9, rel=1e-3)

    def test_overlapping_peaks_get_the_whole_window(self, fitting_service):
        s = make_spectrum([
            Peak(center=600e-9, fwhm=2e-9, area=1000e-9),
            Peak(center=600.4e-9, fwhm=2e-9, area=1000e-9),
        ])

        with pytest.warns(DegenerateFitWarning):
            fit = fitting_service.fit_spectrum(s, 2, n_samples=0)

        assert fit.ci95["peak0_center"] == pytest.approx(s.window)
        assert fit.ci95["peak1_center"] == pytest.approx(s.window)
        assert fit.warnings

    def test_flat_spectrum(self, fitting_service):
        with pytest.raises(EmptySpectrum):
            fitting_service.fit_spectrum(make_spectrum([]), 1)

    def test_start_outside_the_window(self, fitting_service):
        s = make_spectrum([Peak(center=600e-9, fwhm=2e-9, area=1000e-9)])
        init = LineshapeParams(peaks=(Peak(center=700e-9, fwhm=2e-9, area=1e-6),))
        with pytest.raises(DomainValidationError):
            fitting_service.fit_spectrum(s, 1, init=init)


def test_background_lines_are_labelled(fitting_service):
    fit = FitResult(
        model_id="pseudo_voigt_2",
        params={"peak0_center": 576.0e-9, "peak1_center": 590e-9, "peak2_center": 620.5e-9, "baseline": 1.0},
        residual_norm=0.0,
        n_points=10,
    )
    assert fitting_service.label_background_peaks(fit) == {"peak0": "PVP", "peak2": "PVA"}


class TestMonteCarlo:
    @pytest.fixture
    def line(self) -> CurveData:
        x = np.linspace(-5.0, 0.0, 20)
        noise = np.random.default_rng(8).normal(0.0, 0.1, x.size)
        return CurveData(x=x, y=2.0 + 1.0 * x + noise)

    def test_interval_brackets_the_estimate(self, fitting_service, line):
        model = PowerLawModel()
        estimate = np.array([1.0, 2.0])

        ci = fitting_service.mc_confidence(
            model, line, estimate, 200, seed=1, noise=NoiseModel(kind="gaussian", sigma=0.1),
        )

        lower, upper = ci["slope"]
        assert lower < 1.0 < upper
        assert 0.01 < upper - lower < 0.5

    def test_fixed_parameters_get_no_interval(self, fitting_service, line):
        ci = fitting_service.mc_confidence(
            PowerLawModel(), line, np.array([1.0, 2.0]), 100, seed=1, free=[True, False],
        )
        assert set(ci) == {"slope"}

    def test_seeded(self, fitting_service, line):
        args = (PowerLawModel(), line, np.array([1.0, 2.0]), 100)
        assert fitting_service.mc_confidence(*args, seed=5) == fitting_service.mc_confidence(*args, seed=5)

    def test_too_few_samples(self, fitting_service, line):
        with pytest.raises(InsufficientSamples):
            fitting_service.mc_confidence(PowerLawModel(), line, np.array([1.0, 2.0]), 10, seed=1)


def exact_g2_histogram(params: ThreeLevelParams, factor: float = 1e4) -> CorrelationHistogram:
    edges = np.arange(-100_000, 100_100, 100).astype(np.float64)
    centers = 0.5 * (edges[1:] + edges[:-1])
    normalized = g2_model(centers * 1e-12, params)
    return CorrelationHistogram(
        bin_edges=edges,
        raw_counts=np.rint(normalized * factor).astype(np.int64),
        normalized=normalized,
        normalization_factor=factor,
        lag_range=100_000.0,
    )


class TestNoiseFreeData:
    def test_g2_parameters_come_back_exactly(self, fitting_service, g2_params):
        fit = fitting_service.fit_g2(exact_g2_histogram(g2_params), n_samples=0)

        for name in ("antibunch_amp", "bunch_amp", "excited_lifetime", "shelving_lifetime"):
            assert fit.params[name] == pytest.approx(getattr(g2_params, name), rel=1e-6)
        assert fit.params["delay_offset"] == pytest.approx(0.0, abs=1e-14)
        assert fit.residual_norm < 1e-9

    def test_decay_parameters_come_back_exactly(self, fitting_service):
        model = DecayModel()
        x = np.linspace(0.0, 20.0, 200)
        truth = np.array([1000.0, 2.0, 5.0])
        data = CurveData(x=x, y=model.evaluate(x, truth))

        fit = fitting_service.fit_curve(model, data, [800.0, 1.5, 3.0], n_samples=0)

        assert [fit.params[name] for name in model.param_names] == pytest.approx(truth, rel=1e-6)
        assert fit.residual_norm < 1e-9

    def test_saturation_parameters_come_back_exactly(self, fitting_service):
        powers = np.geomspace(1e-5, 1e-1, 12)
        fit = fitting_service.fit_saturation(powers, 1e6 * powers / (powers + 1e-3) + 100.0, n_samples=0)

        assert fit.params["sat_power"] == pytest.approx(1e-3, rel=1e-6)
        assert fit.params["sat_intensity"] == pytest.approx(1e6, rel=1e-6)
        assert fit.params["dark_intensity"] == pytest.approx(100.0, abs=1e-3)

    def test_power_law_comes_back_exactly(self, fitting_service):
        powers = np.geomspace(1e-6, 1e-3, 8)
        fit = fitting_service.fit_power_law(powers, 3.0 * powers**1.5)

        assert fit.params["slope"] == pytest.approx(1.5, rel=1e-6)
        assert fit.params["log_prefactor"] == pytest.approx(np.log(3.0), rel=1e-6)

    def test_spectrum_comes_back_exactly(self, fitting_service):
        s = make_spectrum([Peak(center=600e-9, fwhm=2e-9, area=1000e-9)])
        fit = fitting_service.fit_spectrum(s, 1, n_samples=0)

        assert fit.params["peak0_center"] == pytest.approx(600e-9, rel=1e-6)
        assert fit.params["peak0_fwhm"] == pytest.approx(2e-9, rel=1e-6)
        assert fit.params["peak0_area"] == pytest.approx(1000e-9, rel=1e-6)
        assert fit.params["baseline"] == pytest.approx(10.0, rel=1e-6)

    def test_bootstrap_interval_collapses(self, fitting_service):
        powers = np.geomspace(1e-5, 1e-1, 12)
        fit = fitting_service.fit_saturation(powers, 1e6 * powers / (powers + 1e-3) + 100.0, n_samples=100)

        for name in ("sat_power", "sat_intensity"):
            lower, upper = fit.ci95[name]
            assert upper - lower < 1e-6 * fit.params[name]


class TestOrdering:
    def test_saturation_ignores_point_order(self, fitting_service):
        powers = np.geomspace(1e-5, 1e-1, 12)
        rng = np.random.default_rng(2)
        intensities = (1e6 * powers / (powers + 1e-3) + 100.0) * rng.normal(1.0, 0.05, powers.size)
        order = rng.permutation(powers.size)

        fit = fitting_service.fit_saturation(powers, intensities, n_samples=0)
        shuffled = fitting_service.fit_saturation(powers[order], intensities[order], n_samples=0)

        assert shuffled.params == fit.params

    def test_curve_fit_ignores_point_order(self, fitting_service):
        model = DecayModel()
        x = np.linspace(0.0, 20.0, 200)
        y = model.evaluate(x, np.array([1000.0, 2.0, 5.0])) + np.random.default_rng(3).normal(0.0, 5.0, x.size)
        order = np.random.default_rng(4).permutation(x.size)

        fit = fitting_service.fit_curve(model, CurveData(x=x, y=y), [800.0, 1.5, 3.0], n_samples=0)
        shuffled = fitting_service.fit_curve(model, CurveData(x=x[order], y=y[order]), [800.0, 1.5, 3.0], n_samples=0)

        for name in model.param_names:
            assert shuffled.params[name] == pytest.approx(fit.params[name], rel=1e-8)


def test_flat_histogram_has_no_dip(fitting_service):
    edges = np.arange(-50_000, 50_100, 100).astype(np.float64)
    hist = CorrelationHistogram(
        bin_edges=edges,
        raw_counts=np.full(edges.size - 1, 10_000),
        normalized=np.ones(edges.size - 1),
        normalization_factor=1e4,
        lag_range=50_000.0,
    )

    fit = fitting_service.fit_g2(hist, n_samples=0)

    assert fit.params["antibunch_amp"] == pytest.approx(0.0, abs=1e-9)
    assert fit.params["bunch_amp"] == pytest.approx(0.0, abs=1e-9)
    lower, upper = fit.interval("g2_zero")
    assert lower <= 1.0 <= upper


SAT_POWER = 142.6e-6
POLYMER_LINES = (575.5e-9, 609.6e-9, 642.5e-9, 662.9e-9)


def noisy_saturation(seed: int) -> tuple[np.ndarray, np.ndarray]:
    powers = np.geomspace(5e-6, 3e-3, 25)
    clean = 2e5 * powers / (powers + SAT_POWER) + 300.0
    return powers, clean * np.random.default_rng(seed).normal(1.0, 0.05, powers.size)


def poisson_decay(seed: int, lifetime: float = 2e-9) -> DecayHistogram:
    edges = np.arange(0, 20_000 + 16, 16).astype(np.float64)
    centers = 0.5 * (edges[1:] + edges[:-1])
    expected = 5e3 * np.exp(-centers * 1e-12 / lifetime) + 20.0
    counts = np.random.default_rng(seed).poisson(expected)
    return DecayHistogram(bin_edges=edges, counts=counts, n_sync=100_000, period=48_076.9)


class TestMeasuredScenarios:
    def test_noise_free_saturation_at_the_measured_power(self, fitting_service):
        powers = np.geomspace(5e-6, 3e-3, 25)
        fit = fitting_service.fit_saturation(powers, 2e5 * powers / (powers + SAT_POWER) + 300.0, n_samples=0)
        assert fit.params["sat_power"] == pytest.approx(SAT_POWER, rel=1e-6)

    def test_saturation_with_five_percent_noise(self, fitting_service):
        fit = fitting_service.fit_saturation(*noisy_saturation(31), n_samples=0)
        assert fit.params["sat_power"] == pytest.approx(SAT_POWER, rel=0.1)

    def test_four_polymer_lines(self, fitting_service):
        wavelength = np.linspace(550e-9, 690e-9, 1401)
        counts = np.full(wavelength.shape, 50.0)
        for center, area in zip(POLYMER_LINES, (3e-6, 2e-6, 2.5e-6, 1.5e-6)):
            counts = counts + pseudo_voigt(wavelength, Peak(center=center, fwhm=10e-9, area=area))
        noisy = np.clip(counts + np.random.default_rng(32).normal(0.0, 2.0, counts.size), 0.0, None)

        fit = fitting_service.fit_spectrum(Spectrum(wavelength=wavelength, counts=noisy), 4, n_samples=0)

        for i, center in enumerate(POLYMER_LINES):
            assert fit.params[f"peak{i}_center"] == pytest.approx(center, abs=0.5e-9)


@pytest.mark.slow
def test_saturation_interval_covers_the_measured_power(fitting_service):
    within = covered = 0
    for seed in range(200):
        fit = fitting_service.fit_saturation(*noisy_saturation(seed), n_samples=100, seed=seed)
        lower, upper = fit.interval("sat_power")
        within += abs(fit.params["sat_power"] - SAT_POWER) <= 0.1 * SAT_POWER
        covered += lower <= SAT_POWER <= upper

    assert within >= 185
    assert covered >= 180


@pytest.mark.slow
def test_lifetime_interval_coverage_under_poisson_noise(fitting_service):
    covered = 0
    for trial in range(200):
        lower, upper = fitting_service.fit_lifetime(poisson_decay(1000 + trial), n_samples=100, seed=trial) \
            .interval("lifetime")
        covered += lower <= 2e-9 <= upper

    assert 180 <= covered <= 198
