"""Module containing fitting service abstractions."""

from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from emitterkit.core.domain.emitter import LineshapeParams, ThreeLevelParams
from emitterkit.core.domain.fit import CurveData, FitResult, NoiseModel, Spectrum
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.physics.curves import CurveModel


class IFittingService(ABC):
    """A class representing fitting service."""

    @abstractmethod
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
        """The abstract fitting an arbitrary curve model.

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

        Returns:
            FitResult: The fit.
        """

    @abstractmethod
    def fit_g2(
        self,
        hist: CorrelationHistogram,
        init: Optional[ThreeLevelParams] = None,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> FitResult:
        """The abstract fitting the three-level g² model.

        Args:
            hist (CorrelationHistogram): Normalized histogram.
            init (Optional[ThreeLevelParams]): Starting point.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Returns:
            FitResult: The fit with derived g2_zero.
        """

    @abstractmethod
    def fit_lifetime(
        self,
        decay: DecayHistogram,
        fit_window: Optional[tuple[float, float]] = None,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> FitResult:
        """The abstract fitting a single exponential tail.

        Args:
            decay (DecayHistogram): TRPL histogram.
            fit_window (Optional[tuple[float, float]]): Window in picoseconds.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Returns:
            FitResult: The fit.
        """

    @abstractmethod
    def fit_saturation(
        self,
        powers: Sequence[float],
        intensities: Sequence[float],
        n_samples: Optional[int] = None,
        seed: int = 0,
        noise: Optional[NoiseModel] = None,
    ) -> FitResult:
        """The abstract fitting the saturation curve.

        Args:
            powers (Sequence[float]): Powers in watts.
            intensities (Sequence[float]): Count rates.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.
            noise (Optional[NoiseModel]): Bootstrap noise model.

        Returns:
            FitResult: The fit with derived alpha.
        """

    @abstractmethod
    def fit_power_law(
        self,
        powers: Sequence[float],
        intensities: Sequence[float],
        max_power: Optional[float] = None,
    ) -> FitResult:
        """The abstract fitting a log-log slope.

        Args:
            powers (Sequence[float]): Powers in watts.
            intensities (Sequence[float]): Count rates.
            max_power (Optional[float]): Highest power included.

        Returns:
            FitResult: The fit with the alpha classification.
        """

    @abstractmethod
    def fit_spectrum(
        self,
        s: Spectrum,
        n_peaks: int,
        init: Optional[LineshapeParams] = None,
        fit_gauss_fraction: bool = False,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> FitResult:
        """The abstract fitting pseudo-Voigt peaks plus baseline.

        Args:
            s (Spectrum): The spectrum.
            n_peaks (int): Number of peaks.
            init (Optional[LineshapeParams]): Starting point.
            fit_gauss_fraction (bool): Whether the Gaussian share is fitted.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Returns:
            FitResult: The fit in SI units.
        """

    @abstractmethod
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
        """The abstract computing parametric bootstrap intervals.

        Args:
            model (CurveModel): The model.
            data (CurveData): Observations.
            point_estimate (np.ndarray): Converged parameter vector.
            n_samples (int): Number of synthetic data sets.
            seed (int): Master seed.
            noise (Optional[NoiseModel]): Noise model.
            free (Optional[Sequence[bool]]): Mask of fitted parameters.

        Returns:
            dict[str, tuple[float, float]]: 95% intervals per parameter.
        """

    @abstractmethod
    def label_background_peaks(
        self,
        fit: FitResult,
        references: Optional[dict[str, float]] = None,
        tolerance: Optional[float] = None,
    ) -> dict[str, str]:
        """The abstract tagging fitted peaks with known background lines.

        Args:
            fit (FitResult): A spectrum fit.
            references (Optional[dict[str, float]]): Line name → wavelength.
            tolerance (Optional[float]): Largest distance in meters.

        Returns:
            dict[str, str]: Peak prefix → line name.
        """
