"""Module containing thin-film service abstractions."""

from abc import ABC, abstractmethod
from typing import Any, Optional, Sequence

from emitterkit.core.domain.thinfilm import (
    IndexEstimate,
    LayerStack,
    OplCurve,
    ThicknessEstimate,
)


class IThinFilmService(ABC):
    """A class representing thin-film service."""

    @abstractmethod
    def default_stack(self, wavelength: Optional[float] = None) -> LayerStack:
        """The abstract returning the SiO₂(280 nm)/Si substrate.

        Args:
            wavelength (Optional[float]): Probe wavelength in meters.

        Returns:
            LayerStack: The bare stack.
        """

    @abstractmethod
    def reflect(self, stack: LayerStack) -> complex:
        """The abstract returning the amplitude reflectance.

        Args:
            stack (LayerStack): The stack.

        Returns:
            complex: r.
        """

    @abstractmethod
    def psi_opl(
        self,
        stack_with_flake: LayerStack,
        stack_bare: LayerStack,
        wavelength: Optional[float] = None,
    ) -> float:
        """The abstract returning the excess optical path of the top film.

        Args:
            stack_with_flake (LayerStack): Bare stack plus the flake on top.
            stack_bare (LayerStack): The bare stack.
            wavelength (Optional[float]): Probe wavelength in meters.

        Returns:
            float: OPL in meters.
        """

    @abstractmethod
    def build_opl_curve(
        self,
        stack_template: LayerStack,
        flake_index: complex,
        thickness_range: tuple[float, float],
        wavelength: Optional[float] = None,
        step: Optional[float] = None,
    ) -> OplCurve:
        """The abstract tabulating OPL against flake thickness.

        Args:
            stack_template (LayerStack): The bare stack.
            flake_index (complex): The flake's index.
            thickness_range (tuple[float, float]): First and last thickness.
            wavelength (Optional[float]): Probe wavelength in meters.
            step (Optional[float]): Grid step in meters.

        Returns:
            OplCurve: The curve.
        """

    @abstractmethod
    def invert_opl(self, curve: OplCurve, opl: float) -> ThicknessEstimate:
        """The abstract converting a measured OPL into thickness.

        Args:
            curve (OplCurve): The conversion curve.
            opl (float): Measured OPL in meters.

        Returns:
            ThicknessEstimate: Thickness or ambiguous candidates.
        """

    @abstractmethod
    def fit_index(
        self,
        calibration: Sequence[tuple[float, float]],
        stack_template: LayerStack,
        wavelength: Optional[float] = None,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> IndexEstimate:
        """The abstract calibrating the flake index from AFM thicknesses.

        Args:
            calibration (Sequence[tuple[float, float]]): (thickness, OPL)
                pairs in meters.
            stack_template (LayerStack): The bare stack.
            wavelength (Optional[float]): Probe wavelength in meters.
            n_samples (Optional[int]): Bootstrap size, 0 to skip.
            seed (int): Bootstrap seed.

        Returns:
            IndexEstimate: The index with its interval.
        """

    @abstractmethod
    def curve_rows(self, curve: OplCurve) -> list[dict[str, Any]]:
        """The abstract rendering `thickness_nm,opl_nm` rows.

        Args:
            curve (OplCurve): The curve.

        Returns:
            list[dict[str, Any]]: One row per grid point.
        """
