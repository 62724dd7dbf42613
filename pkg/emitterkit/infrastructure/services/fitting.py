"""Module containing fitting service implementation."""

import logging
import warnings
from typing import Callable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import OptimizeResult, least_squares
from scipy.signal import find_peaks, peak_widths

from emitterkit.config import AppConfig
from emitterkit.core.domain.emitter import LineshapeParams, ThreeLevelParams
from emitterkit.core.domain.fit import CurveData, FitResult, NoiseModel, Spectrum
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.errors import (
    DegenerateDesign,
    DegenerateFitWarning,
    DomainValidationError,
    EmptyDecay,
    EmptySpectrum,
    FitError,
    InsufficientSamples,
    InvalidRegime,
    NotConverged,
    UnstableBootstrap,
)
from emitterkit.core.physics.curves import (
    GAUSS_NORM,
    LN2,
    ConstantModel,
    CurveModel,
    DecayModel,
    G2Model,
    PowerLawModel,
    PseudoVoigtModel,
    SaturationModel,
)
from emitterkit.infrastructure.services.ifitting import IFittingService
from emitterkit.infrastructure.utils.consts import BACKGROUND_LINES, BACKGROUND_TOLERANCE, Z95
from emitterkit.infrastructure.utils.rng import substream

logger = logging.getLogger(__name__)

Derived = dict[str, Callable[[np.ndarray], float]]

NM = 1e-9
NS = 1e-9
PS_PER_NS = 1e3
MIN_FIT_BINS = 10
JITTER_WINDOW_SIGMAS = 4.0
PEAK_THRESHOLD_SIGMA = 3.0
G2_SCALES = {"excited_lifetime": NS, "shelving_lifetime": NS, "delay_offset": NS}


def classify_alpha(alpha: float, tolerance: float) -> str:
    """A function sorting a log-log slope into an emission class.

    Args:
        alpha (float): The slope.
        tolerance (float): Half width of the α ≈ 1 and α ≈ 2 bands.

    Returns:
        str: "free_exciton", "biexciton", "defect" or "unclassified".
    """

    if abs(alpha - 1.0) <= tolerance:
        return "free_exciton"
    if abs(alpha - 2.0) <= tolerance:
        return "biexciton"
    if alpha < 1.0 - tolerance:
        return "defect"
    return "unclassified"


def _interval(values: np.ndarray, estimate: float) -> tuple[float, float]:
    lower, upper = np.percentile(values, [2.5, 97.5])
    return float(min(lower, estimate)), float(max(upper, estimate))


def _gradient(function: Callable[[np.ndarray], float], theta: np.ndarray) -> np.ndarray:
    gradient = np.empty(theta.size)
    for i in range(theta.size):
        step = 1e-6 * max(abs(theta[i]), 1.0)
        up, down = theta.copy(), theta.copy()
        up[i] += step
        down[i] -= step
        gradient[i] = (function(up) - function(down)) / (2.0 * step)
    return gradient


class FittingService(IFittingService):
    """A class implementing the fitting service.

    Every fit is a Levenberg–Marquardt least-squares problem in the
    natural units of its data (ns, nm, scaled powers); results are
    converted to SI units on the way out.
    """

    _config: AppConfig

    def __init__(self, config: AppConfig) -> None:
        """The initializer of the `fitting service`.

        Args:
            config (AppConfig): The toolkit configuration.
        """

        self._config = config

    def fit_curve(
        self,
        model: CurveModel,
        data: CurveData,
        theta0: Sequence[float],
        free: Optional[Sequence[bool]] = None,
        noise: Optional[NoiseModel] = None,
        n_samples: Optional[int] = None,
        seed: int = 0,
        scales: Optional[dict[str, float]] = None,
    ) -> FitResult:
        """The method fitting an arbitrary curve model.

        Args:
            model (CurveModel): The model.
            data (CurveData): Observations.
            theta0 (Sequence[float]): Initial parameter vector.
            free (Optional[Sequence[bool]]): Mask of fitted parameters.
            noise (Optional[NoiseModel]): Bootstrap noise model.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.
            scales (Optional[dict[str, float]]): Factors converting fit
                units to reported units.

        Raises:
            NotConverged: When the optimizer stops early.

        Returns:
            FitResult: The fit.
        """

        mask = self._mask(model, free)
        theta, opt = self._estimate(model, data, np.asarray(theta0, dtype=np.float64), mask, scales or {})
        return self._summarize(model, data, theta, opt, mask, noise, n_samples, seed, scales or {})

    def fit_g2(
        self,
        hist: CorrelationHistogram,
        init: Optional[ThreeLevelParams] = None,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> FitResult:
        """The method fitting g²(τ) = 1 − A·e^(−|τ−μ|/t1) + B·e^(−|τ−μ|/t2).

        The fit runs in nanoseconds on the normalized values with Poisson
        weights taken from the raw counts. An amplitude converging negative
        is pinned to zero together with its lifetime and the reduced model
        is refitted.

        Args:
            hist (CorrelationHistogram): Normalized histogram.
            init (Optional[ThreeLevelParams]): Starting point, heuristics
                when absent.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Raises:
            DomainValidationError: For unnormalized or short histograms.
            NotConverged: When the optimizer stops early.
            InvalidRegime: When the fit ends with t2 ≤ t1.

        Returns:
            FitResult: The fit with derived g2_zero.
        """

        if hist.normalized is None or hist.normalization_factor is None:
            raise DomainValidationError("histogram must be normalized before fitting")
        if hist.raw_counts.size < MIN_FIT_BINS:
            raise DomainValidationError("g2 fit needs at least 10 bins", n_bins=hist.raw_counts.size)

        reference = hist.bin_width if hist.binning == "uniform" else 1.0
        count_scale = hist.normalization_factor * hist.bin_widths / reference
        data = CurveData(
            x=hist.bin_centers / PS_PER_NS,
            y=hist.normalized,
            sigma=np.sqrt(np.maximum(hist.raw_counts, 1)) / count_scale,
            count_scale=count_scale,
        )

        model = G2Model()
        if init is None:
            theta0 = self._g2_start(data.x, data.y, hist.bin_width / PS_PER_NS)
        else:
            theta0 = np.array([
                init.antibunch_amp,
                init.bunch_amp,
                init.excited_lifetime / NS,
                init.shelving_lifetime / NS,
                init.delay_offset / NS,
            ])

        free = np.ones(model.n_params, dtype=bool)
        theta, opt = self._estimate(model, data, theta0, free, G2_SCALES)

        pinned = True
        while pinned:
            pinned = False
            for amplitude, lifetime in ((0, 2), (1, 3)):
                if free[amplitude] and theta[amplitude] < 0:
                    logger.warning(
                        "%s converged negative (%.3g), pinned at zero",
                        model.param_names[amplitude], theta[amplitude],
                    )
                    theta0 = theta.copy()
                    theta0[amplitude] = 0.0
                    theta0[lifetime] = abs(theta0[lifetime])
                    free[amplitude] = free[lifetime] = False
                    theta, opt = self._estimate(model, data, theta0, free, G2_SCALES)
                    pinned = True

        for lifetime in (2, 3):
            if free[lifetime] and theta[lifetime] <= 0:
                raise InvalidRegime(f"{model.param_names[lifetime]} converged non-positive")
        if free[0] and free[1] and theta[3] <= theta[2]:
            raise InvalidRegime(
                "shelving lifetime must exceed excited lifetime",
                excited_lifetime=theta[2] * NS,
                shelving_lifetime=theta[3] * NS,
            )

        result = self._summarize(
            model, data, theta, opt, free, None, n_samples, seed, G2_SCALES,
            derived={"g2_zero": lambda t: 1.0 - t[0] + t[1]},
        )

        logger.info(
            "g2 fit: g2(0)=%.4f, t1=%.4g s, t2=%.4g s",
            result.derived["g2_zero"], result.params["excited_lifetime"], result.params["shelving_lifetime"],
        )
        return result

    def fit_lifetime(
        self,
        decay: DecayHistogram,
        fit_window: Optional[tuple[float, float]] = None,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> FitResult:
        """The method fitting c·exp(−t/τ) + baseline to a decay tail.

        The window defaults to 4 jitter σ past the histogram maximum
        through its end; time is measured from the window start, so
        `amplitude` is the signal there. No instrument response is deconvolved.

        Args:
            decay (DecayHistogram): TRPL histogram.
            fit_window (Optional[tuple[float, float]]): Window in picoseconds.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Raises:
            EmptyDecay: When no bin holds a count.
            DomainValidationError: For windows outside the histogram or
                shorter than 10 bins.
            NotConverged: When no decay stands out of the baseline; the
                constant fit is attached as best_so_far.

        Returns:
            FitResult: The fit, lifetime in seconds.
        """

        counts = decay.counts.astype(np.float64)
        if not np.any(counts > 0):
            raise EmptyDecay("decay histogram holds no count")

        if fit_window is None:
            peak = float(decay.bin_edges[int(np.argmax(counts))])
            start, end = peak + JITTER_WINDOW_SIGMAS * decay.jitter_sigma, float(decay.bin_edges[-1])
        else:
            start, end = float(fit_window[0]), float(fit_window[1])
        if not decay.bin_edges[0] <= start < end <= decay.bin_edges[-1]:
            raise DomainValidationError("fit window outside the histogram", start=start, end=end)

        centers = decay.bin_centers
        mask = (centers >= start) & (centers <= end)
        if mask.sum() < MIN_FIT_BINS:
            raise DomainValidationError("lifetime fit needs at least 10 bins", n_bins=int(mask.sum()))

        y = counts[mask]
        data = CurveData(
            x=(centers[mask] - start) / PS_PER_NS,
            y=y,
            sigma=np.sqrt(np.maximum(y, 1.0)),
            count_scale=1.0,
        )

        model = DecayModel()
        free = self._mask(model, None)
        scales = {"lifetime": NS}
        try:
            theta, opt = self._estimate(model, data, self._decay_start(data.x, y), free, scales)
        except NotConverged as error:
            raise NotConverged(str(error), best_so_far=self._baseline_only(data)) from error

        sd = np.sqrt(np.clip(np.diag(self._covariance(model, data, theta, opt, free)), 0.0, None))
        if theta[0] <= Z95 * sd[0] or theta[1] <= 0:
            logger.warning("no decay above baseline, amplitude %.3g ± %.3g", theta[0], sd[0])
            raise NotConverged(
                "decay amplitude is not significant, baseline-only model preferred",
                best_so_far=self._baseline_only(data),
            )

        result = self._summarize(model, data, theta, opt, free, None, n_samples, seed, scales)

        logger.info("lifetime fit: tau=%.4g s over %d bins", result.params["lifetime"], len(data))
        return result

    def fit_saturation(
        self,
        powers: Sequence[float],
        intensities: Sequence[float],
        n_samples: Optional[int] = None,
        seed: int = 0,
        noise: Optional[NoiseModel] = None,
    ) -> FitResult:
        """The method fitting I(P) = I_sat·P/(P + P_sat) + I_d.

        Powers and intensities are scaled by their maxima before fitting.
        The log-log slope over the sub-saturation region (P ≤ P_sat, at
        least the three lowest powers) is attached as derived `alpha`.

        Args:
            powers (Sequence[float]): Powers in watts.
            intensities (Sequence[float]): Count rates.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.
            noise (Optional[NoiseModel]): Bootstrap noise model, residual
                resampling by default.

        Raises:
            DegenerateDesign: For fewer than four distinct powers.

        Returns:
            FitResult: The fit with derived alpha and its class.
        """

        p = np.asarray(powers, dtype=np.float64)
        i = np.asarray(intensities, dtype=np.float64)
        if p.ndim != 1 or p.shape != i.shape:
            raise DomainValidationError("powers and intensities must be equal-length vectors")
        if np.any(p < 0):
            raise DomainValidationError("powers must be non-negative")
        if np.unique(p).size < 4:
            raise DegenerateDesign("saturation fit needs at least four distinct powers", n_distinct=np.unique(p).size)

        order = np.lexsort((i, p))
        p, i = p[order], i[order]
        p_scale = float(p.max())
        i_scale = float(np.abs(i).max())
        if i_scale == 0:
            raise DomainValidationError("intensities are all zero")

        model = SaturationModel()
        data = CurveData(x=p / p_scale, y=i / i_scale)
        scales = {"sat_intensity": i_scale, "sat_power": p_scale, "dark_intensity": i_scale}
        free = self._mask(model, None)
        theta, opt = self._estimate(model, data, self._saturation_start(data.x, data.y), free, scales)
        result = self._summarize(
            model, data, theta, opt, free, noise or NoiseModel(kind="residual"), n_samples, seed, scales,
        )

        distinct = np.unique(p)
        limit = max(result.params["sat_power"], float(distinct[min(2, distinct.size - 1)]))
        try:
            law = self.fit_power_law(p, i, max_power=limit)
        except (DomainValidationError, FitError) as error:
            logger.warning("no power-law slope below saturation: %s", error)
            return result

        result = result.model_copy(update={
            "derived": {**result.derived, "alpha": law.params["slope"]},
            "cov_ci95": {**result.cov_ci95, "alpha": law.cov_ci95["slope"]},
            "classification": law.classification,
        })

        logger.info(
            "saturation fit: P_sat=%.4g W, I_sat=%.4g cps, alpha=%.3f (%s)",
            result.params["sat_power"], result.params["sat_intensity"], law.params["slope"], law.classification,
        )
        return result

    def fit_power_law(
        self,
        powers: Sequence[float],
        intensities: Sequence[float],
        max_power: Optional[float] = None,
    ) -> FitResult:
        """The method fitting log I = c + α·log P.

        Args:
            powers (Sequence[float]): Powers in watts.
            intensities (Sequence[float]): Count rates.
            max_power (Optional[float]): Highest power included.

        Raises:
            DegenerateDesign: For fewer than two usable distinct powers.

        Returns:
            FitResult: The fit with the alpha classification.
        """

        p = np.asarray(powers, dtype=np.float64)
        i = np.asarray(intensities, dtype=np.float64)
        mask = (p > 0) & (i > 0)
        if max_power is not None:
            mask &= p <= max_power
        if np.unique(p[mask]).size < 2:
            raise DegenerateDesign("power law needs two distinct positive powers")

        x, y = np.log(p[mask]), np.log(i[mask])
        slope, intercept = np.polyfit(x, y, 1)
        result = self.fit_curve(PowerLawModel(), CurveData(x=x, y=y), [slope, intercept], n_samples=0)
        classification = classify_alpha(result.params["slope"], self._config.ALPHA_TOLERANCE)

        logger.info("power law: alpha=%.4f over %d points (%s)", result.params["slope"], x.size, classification)
        return result.model_copy(update={"classification": classification})

    def fit_spectrum(
        self,
        s: Spectrum,
        n_peaks: int,
        init: Optional[LineshapeParams] = None,
        fit_gauss_fraction: bool = False,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> FitResult:
        """The method fitting pseudo-Voigt peaks plus a constant baseline.

        Peaks are reported sorted by center. Peaks the data cannot
        separate (centers closer than half a FWHM, a center interval wider
        than the FWHM, or a multi-peak fit that stops early) raise a
        `DegenerateFitWarning` and get the recorded window as center
        interval.

        Args:
            s (Spectrum): The spectrum.
            n_peaks (int): Number of peaks.
            init (Optional[LineshapeParams]): Starting point, peak picking
                when absent.
            fit_gauss_fraction (bool): Whether the Gaussian share is fitted.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Raises:
            DomainValidationError: For too few points or a bad start.
            EmptySpectrum: When no peak stands out of the noise.
            NotConverged: When a single-peak fit stops early.

        Returns:
            FitResult: The fit in SI units with derived peak heights.
        """

        if n_peaks < 1:
            raise DomainValidationError("n_peaks must be positive", n_peaks=n_peaks)
        if s.counts.size <= 5 * n_peaks:
            raise DomainValidationError("spectrum too short for the requested peaks", n_points=s.counts.size)

        x = s.wavelength / NM
        y = s.counts
        model = PseudoVoigtModel(n_peaks, fit_gauss_fraction=fit_gauss_fraction)

        if init is not None:
            if len(init.peaks) != n_peaks:
                raise DomainValidationError("init must hold n_peaks peaks", n_init=len(init.peaks))
            try:
                init.check_window(*s.window)
            except ValueError as error:
                raise DomainValidationError(str(error)) from error
            peaks = [(p.center / NM, p.fwhm / NM, p.area / NM, p.gauss_fraction) for p in init.peaks]
            baseline = init.baseline
        else:
            peaks, baseline = self._pick_peaks(x, y, n_peaks)

        theta0 = np.array([
            value
            for center, fwhm, area, eta in peaks
            for value in ((center, fwhm, area, eta) if fit_gauss_fraction else (center, fwhm, area))
        ] + [baseline])

        data = CurveData(x=x, y=y, sigma=np.sqrt(np.maximum(y, 1.0)), count_scale=1.0)
        scales = {
            name: NM for name in model.param_names
            if name.endswith(("_center", "_fwhm", "_area"))
        }
        derived = {f"peak{i}_height": self._height(model, i) for i in range(n_peaks)}
        free = self._mask(model, None)

        try:
            theta, opt = self._solve(model, data, theta0, free)
        except ValueError as error:
            raise NotConverged("spectrum fit failed to start", error=error) from error

        converged = self._converged(opt)
        if not converged and n_peaks == 1:
            raise NotConverged(
                "spectrum fit stopped early",
                best_so_far=self._summarize(model, data, theta, opt, free, None, 0, seed, scales, derived, False),
            )

        theta = self._sorted_peaks(model, theta)
        unresolved = self._unresolved(model, theta)
        if not converged:
            unresolved |= set(range(n_peaks))

        bootstrap = 0 if unresolved else n_samples
        try:
            result = self._summarize(model, data, theta, opt, free, None, bootstrap, seed, scales, derived, converged)
        except UnstableBootstrap:
            if n_peaks == 1:
                raise
            unresolved |= set(range(n_peaks))
            result = self._summarize(model, data, theta, opt, free, None, 0, seed, scales, derived, converged)

        for i, (_, fwhm, _, _) in enumerate(model.peaks(theta)):
            lower, upper = result.ci95.get(f"peak{i}_center", (0.0, 0.0))
            if upper - lower > fwhm * NM:
                unresolved.add(i)

        if unresolved:
            result = self._widen(result, sorted(unresolved), s.window)

        logger.info(
            "spectrum fit: %d peaks, centers %s nm",
            n_peaks, ", ".join(f"{result.params[f'peak{i}_center'] / NM:.2f}" for i in range(n_peaks)),
        )
        return result

    def mc_confidence(
        self,
        model: CurveModel,
        data: CurveData,
        point_estimate: np.ndarray,
        n_samples: int,
        seed: int,
        noise: Optional[NoiseModel] = None,
        free: Optional[Sequence[bool]] = None,
    ) -> dict[str, tuple[float, float]]:
        """The method computing parametric bootstrap intervals.

        Synthetic data sets are drawn around the fitted curve with the
        data's noise model (Poisson for count data, residual resampling
        otherwise), refitted from the point estimate, and summarized by
        their 2.5/97.5 percentiles. Sample i draws from its own sub-stream,
        so results do not depend on the number of workers.

        Args:
            model (CurveModel): The model.
            data (CurveData): Observations.
            point_estimate (np.ndarray): Converged parameter vector.
            n_samples (int): Number of synthetic data sets.
            seed (int): Master seed.
            noise (Optional[NoiseModel]): Noise model.
            free (Optional[Sequence[bool]]): Mask of fitted parameters.

        Raises:
            InsufficientSamples: Below the configured minimum.
            UnstableBootstrap: When too many refits fail.

        Returns:
            dict[str, tuple[float, float]]: Intervals of the free
                parameters in fit units.
        """

        theta = np.asarray(point_estimate, dtype=np.float64)
        mask = self._mask(model, free)
        samples = self._bootstrap(model, data, theta, mask, noise, n_samples, seed)
        return {
            name: _interval(samples[:, i], theta[i])
            for i, name in enumerate(model.param_names)
            if mask[i]
        }

    def label_background_peaks(
        self,
        fit: FitResult,
        references: Optional[dict[str, float]] = None,
        tolerance: Optional[float] = None,
    ) -> dict[str, str]:
        """The method tagging fitted peaks with the nearest reference line.

        Args:
            fit (FitResult): A spectrum fit.
            references (Optional[dict[str, float]]): Line name → wavelength,
                the polymer residue lines by default.
            tolerance (Optional[float]): Largest distance in meters.

        Returns:
            dict[str, str]: Peak prefix → line name, matched peaks only.
        """

        references = references or BACKGROUND_LINES
        tolerance = BACKGROUND_TOLERANCE if tolerance is None else tolerance

        labels = {}
        for name, center in fit.params.items():
            if not name.endswith("_center"):
                continue
            line, wavelength = min(references.items(), key=lambda item: abs(item[1] - center))
            if abs(wavelength - center) <= tolerance:
                labels[name.removesuffix("_center")] = line
        return labels

    def _mask(self, model: CurveModel, free: Optional[Sequence[bool]]) -> np.ndarray:
        if free is None:
            return np.ones(model.n_params, dtype=bool)
        mask = np.asarray(free, dtype=bool)
        if mask.size != model.n_params:
            raise DomainValidationError("free mask does not match the model", expected=model.n_params)
        return mask.copy()

    def _solve(
        self,
        model: CurveModel,
        data: CurveData,
        theta0: np.ndarray,
        free: np.ndarray,
    ) -> tuple[np.ndarray, OptimizeResult]:
        sigma = data.sigma if data.sigma is not None else np.ones_like(data.y)
        analytic = model.jacobian(data.x, theta0) is not None
        n_free = int(free.sum())

        def expand(p: np.ndarray) -> np.ndarray:
            theta = theta0.copy()
            theta[free] = p
            return theta

        def residuals(p: np.ndarray) -> np.ndarray:
            return (model.evaluate(data.x, expand(p)) - data.y) / sigma

        def jacobian(p: np.ndarray) -> np.ndarray:
            return model.jacobian(data.x, expand(p))[:, free] / sigma[:, None]

        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            opt = least_squares(
                residuals,
                theta0[free],
                jac=jacobian if analytic else "2-point",
                method="lm",
                max_nfev=self._config.MAX_ITERATIONS * (1 if analytic else n_free + 1),
                xtol=self._config.STEP_TOLERANCE,
                ftol=self._config.STEP_TOLERANCE,
                gtol=self._config.STEP_TOLERANCE,
            )
        return expand(opt.x), opt

    @staticmethod
    def _converged(opt: OptimizeResult) -> bool:
        return opt.status > 0 and bool(np.all(np.isfinite(opt.x)))

    def _estimate(
        self,
        model: CurveModel,
        data: CurveData,
        theta0: np.ndarray,
        free: np.ndarray,
        scales: dict[str, float],
    ) -> tuple[np.ndarray, OptimizeResult]:
        if len(data) < int(free.sum()):
            raise DegenerateDesign("fewer points than free parameters", n_points=len(data))

        try:
            theta, opt = self._solve(model, data, theta0, free)
        except ValueError as error:
            raise NotConverged(f"{model.model_id} fit failed to start", error=error) from error

        if not self._converged(opt):
            best = self._summarize(model, data, theta, opt, free, None, 0, 0, scales, converged=False)
            logger.warning("%s fit stopped after %d evaluations: %s", model.model_id, opt.nfev, opt.message)
            raise NotConverged(
                f"{model.model_id} fit did not converge",
                best_so_far=best,
                nfev=opt.nfev,
            )
        return theta, opt

    def _covariance(
        self,
        model: CurveModel,
        data: CurveData,
        theta: np.ndarray,
        opt: OptimizeResult,
        free: np.ndarray,
    ) -> np.ndarray:
        sigma = data.sigma if data.sigma is not None else np.ones_like(data.y)
        analytic = model.jacobian(data.x, theta)
        jac = analytic[:, free] / sigma[:, None] if analytic is not None else opt.jac
        residuals = (model.evaluate(data.x, theta) - data.y) / sigma

        cov_free = np.linalg.pinv(jac.T @ jac)
        if data.sigma is None:
            dof = len(data) - int(free.sum())
            cov_free *= float(residuals @ residuals) / dof if dof > 0 else 0.0

        cov = np.zeros((model.n_params, model.n_params))
        cov[np.ix_(free, free)] = cov_free
        return cov

    def _bootstrap(
        self,
        model: CurveModel,
        data: CurveData,
        theta: np.ndarray,
        free: np.ndarray,
        noise: Optional[NoiseModel],
        n_samples: int,
        seed: int,
    ) -> np.ndarray:
        if n_samples < self._config.MIN_MC_SAMPLES:
            raise InsufficientSamples(
                f"bootstrap needs at least {self._config.MIN_MC_SAMPLES} samples",
                n_samples=n_samples,
            )

        noise = noise or NoiseModel(kind="poisson" if data.count_scale is not None else "residual")
        if noise.kind == "poisson" and data.count_scale is None:
            raise DomainValidationError("poisson resampling needs count data")

        fitted = model.evaluate(data.x, theta)
        residuals = data.y - fitted
        n, p = len(data), int(free.sum())
        inflation = np.sqrt(n / (n - p)) if n > p else 1.0

        def refit(index: int) -> Optional[np.ndarray]:
            rng = substream(seed, "bootstrap", index)
            if noise.kind == "poisson":
                scale = data.count_scale
                counts = rng.poisson(np.clip(fitted * scale, 0.0, None))
                y = np.divide(counts, scale, out=fitted.copy(), where=scale > 0)
            elif noise.kind == "residual":
                y = fitted + inflation * rng.choice(residuals, size=n, replace=True)
            else:
                y = fitted + rng.normal(0.0, noise.sigma, size=n)

            try:
                sample, opt = self._solve(model, data.with_observations(y), theta, free)
            except (ValueError, np.linalg.LinAlgError):
                return None
            return sample if self._converged(opt) else None

        samples = Parallel(n_jobs=self._config.N_JOBS, prefer="threads")(
            delayed(refit)(index) for index in range(n_samples)
        )
        accepted = [sample for sample in samples if sample is not None]
        failed = n_samples - len(accepted)

        if failed > self._config.BOOTSTRAP_FAILURE_LIMIT * n_samples:
            raise UnstableBootstrap(
                f"{failed} of {n_samples} bootstrap refits failed",
                failed=failed,
                n_samples=n_samples,
            )
        if failed:
            logger.warning("%d of %d bootstrap refits failed", failed, n_samples)
        return np.vstack(accepted)

    def _summarize(
        self,
        model: CurveModel,
        data: CurveData,
        theta: np.ndarray,
        opt: OptimizeResult,
        free: np.ndarray,
        noise: Optional[NoiseModel],
        n_samples: Optional[int],
        seed: int,
        scales: dict[str, float],
        derived: Optional[Derived] = None,
        converged: bool = True,
    ) -> FitResult:
        derived = derived or {}
        scale = np.array([scales.get(name, 1.0) for name in model.param_names])
        sigma = data.sigma if data.sigma is not None else np.ones_like(data.y)
        residuals = (model.evaluate(data.x, theta) - data.y) / sigma

        cov = self._covariance(model, data, theta, opt, free)
        sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))

        params = {name: float(theta[i] * scale[i]) for i, name in enumerate(model.param_names)}
        derived_values = {name: float(function(theta)) for name, function in derived.items()}
        cov_ci95 = {
            name: (float((theta[i] - Z95 * sd[i]) * scale[i]), float((theta[i] + Z95 * sd[i]) * scale[i]))
            for i, name in enumerate(model.param_names)
            if free[i]
        }
        for name, function in derived.items():
            gradient = _gradient(function, theta)
            half = Z95 * float(np.sqrt(max(gradient @ cov @ gradient, 0.0)))
            cov_ci95[name] = (derived_values[name] - half, derived_values[name] + half)

        ci95: dict[str, tuple[float, float]] = {}
        n_samples = self._config.MC_SAMPLES if n_samples is None else n_samples
        n_accepted = 0
        if converged and n_samples:
            samples = self._bootstrap(model, data, theta, free, noise, n_samples, seed)
            n_accepted = samples.shape[0]
            for i, name in enumerate(model.param_names):
                if free[i]:
                    ci95[name] = _interval(samples[:, i] * scale[i], params[name])
            for name, function in derived.items():
                values = np.array([function(sample) for sample in samples])
                ci95[name] = _interval(values, derived_values[name])

        return FitResult(
            model_id=model.model_id,
            params=params,
            derived=derived_values,
            ci95=ci95,
            cov_ci95=cov_ci95,
            covariance=(cov * np.outer(scale, scale)).tolist(),
            fitted=[name for i, name in enumerate(model.param_names) if free[i]],
            residual_norm=float(np.sqrt(residuals @ residuals)) if np.all(np.isfinite(residuals)) else 0.0,
            n_points=len(data),
            converged=converged,
            n_mc_samples=n_accepted,
        )

    def _baseline_only(self, data: CurveData) -> FitResult:
        return self.fit_curve(ConstantModel(), data, [float(np.mean(data.y))], n_samples=0)

    @staticmethod
    def _g2_start(x: np.ndarray, y: np.ndarray, bin_ns: float) -> np.ndarray:
        i_min = int(np.argmin(y))
        mu, y_min = float(x[i_min]), float(y[i_min])
        bunch = max(float(y.max()) - 1.0, 0.0)
        antibunch = max(1.0 - y_min + bunch, 0.0)

        u = np.abs(x - mu)
        order = np.argsort(u, kind="stable")
        u, y = u[order], y[order]

        # half recovery from the dip towards the bunching shoulder
        recovered = np.nonzero(y >= y_min + 0.5 * (1.0 + bunch - y_min))[0]
        lag = float(u[recovered[0]]) if recovered.size else float(u.max()) / 10.0
        t1 = max(lag / LN2, bin_ns)

        t2 = 10.0 * t1
        if bunch > 0:
            shoulder = float(u[int(np.argmax(y))])
            folded = np.nonzero((u > shoulder) & (y - 1.0 <= bunch / np.e))[0]
            if folded.size and u[folded[0]] - shoulder > 1.5 * t1:
                t2 = float(u[folded[0]] - shoulder)

        return np.array([antibunch, bunch, t1, t2, mu])

    @staticmethod
    def _decay_start(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        baseline = float(np.median(y[-max(y.size // 10, 1):]))
        signal = y - baseline
        positive = signal > max(0.01 * float(signal.max()), 0.0)

        tau, amplitude = float(np.ptp(x)) / 5.0, max(float(signal[0]), 1.0)
        if positive.sum() >= 2:
            slope, intercept = np.polyfit(x[positive], np.log(signal[positive]), 1, w=np.sqrt(signal[positive]))
            if slope < 0:
                tau, amplitude = -1.0 / slope, float(np.exp(intercept))
        return np.array([amplitude, tau, baseline])

    @staticmethod
    def _saturation_start(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        half = np.nonzero(y >= 0.5 * y.max())[0]
        sat_power = float(x[half[0]]) if half.size and x[half[0]] > 0 else 0.1
        sat_intensity = float(y.max()) * (1.0 + sat_power / float(x.max()))
        return np.array([sat_intensity, sat_power, 0.0])

    @staticmethod
    def _pick_peaks(x: np.ndarray, y: np.ndarray, n_peaks: int) -> tuple[list[tuple[float, ...]], float]:
        baseline = float(np.percentile(y, 10))
        noise = 1.4826 * float(np.median(np.abs(np.diff(y)))) / np.sqrt(2.0)
        indices, properties = find_peaks(y, height=float(np.median(y)) + PEAK_THRESHOLD_SIGMA * noise)
        if indices.size == 0:
            raise EmptySpectrum("no peak above baseline + 3 sigma")

        strongest = np.argsort(properties["peak_heights"])[::-1][:n_peaks]
        indices = np.sort(indices[strongest])
        _, _, left, right = peak_widths(y, indices, rel_height=0.5)

        grid = np.arange(x.size)
        spacing = float(np.median(np.diff(x)))
        peaks = []
        for index, lo, hi in zip(indices, left, right):
            fwhm = max(float(np.interp(hi, grid, x) - np.interp(lo, grid, x)), spacing)
            height = max(float(y[index]) - baseline, noise, 1e-12)
            peaks.append((float(x[index]), fwhm, 0.5 * np.pi * height * fwhm, 0.0))

        # split the largest peak until enough components exist
        while len(peaks) < n_peaks:
            widest = max(range(len(peaks)), key=lambda k: peaks[k][2])
            center, fwhm, area, eta = peaks.pop(widest)
            peaks.append((center - 0.25 * fwhm, 0.6 * fwhm, 0.5 * area, eta))
            peaks.append((center + 0.25 * fwhm, 0.6 * fwhm, 0.5 * area, eta))
        peaks.sort()

        return peaks, baseline

    @staticmethod
    def _height(model: PseudoVoigtModel, index: int) -> Callable[[np.ndarray], float]:
        def height(theta: np.ndarray) -> float:
            _, fwhm, area, eta = model.peaks(theta)[index]
            return area * (eta * GAUSS_NORM / fwhm + (1.0 - eta) * 2.0 / (np.pi * fwhm))
        return height

    @staticmethod
    def _sorted_peaks(model: PseudoVoigtModel, theta: np.ndarray) -> np.ndarray:
        stride = model.stride
        chunks = theta[:-1].reshape(model.n_peaks, stride)
        chunks = chunks[np.argsort(chunks[:, 0], kind="stable")]
        return np.concatenate((chunks.ravel(), theta[-1:]))

    @staticmethod
    def _unresolved(model: PseudoVoigtModel, theta: np.ndarray) -> set[int]:
        peaks = model.peaks(theta)
        unresolved = set()
        for i in range(len(peaks)):
            for j in range(i + 1, len(peaks)):
                if abs(peaks[i][0] - peaks[j][0]) < 0.5 * max(abs(peaks[i][1]), abs(peaks[j][1])):
                    unresolved.update((i, j))
        return unresolved

    @staticmethod
    def _widen(result: FitResult, peaks: list[int], window: tuple[float, float]) -> FitResult:
        message = f"peaks {peaks} cannot be resolved, center intervals widened to the window"
        warnings.warn(message, DegenerateFitWarning, stacklevel=3)
        logger.warning(message)

        ci95 = dict(result.ci95)
        for i in peaks:
            center = result.params[f"peak{i}_center"]
            ci95[f"peak{i}_center"] = (min(window[0], center), max(window[1], center))
        return result.model_copy(update={"ci95": ci95, "warnings": [*result.warnings, message]})
