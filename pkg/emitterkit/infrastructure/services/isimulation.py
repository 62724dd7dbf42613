"""Module containing photon simulation service abstractions."""

from abc import ABC, abstractmethod
from typing import Optional, Sequence

from emitterkit.core.domain.photons import (
    DetectorConfig,
    EmitterRates,
    ExcitationConfig,
    IdealTags,
    TimeTagStream,
)


class ISimulationService(ABC):
    """A class representing photon simulation service."""

    @abstractmethod
    def simulate_cw(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        duration: float,
        seed: int,
    ) -> TimeTagStream:
        """The abstract simulating an HBT measurement under CW excitation.

        Args:
            rates (EmitterRates): The emitter rates.
            det (DetectorConfig): The detector pair.
            duration (float): Measurement time in seconds.
            seed (int): The master seed.

        Returns:
            TimeTagStream: Channel A/B detections.
        """

    @abstractmethod
    def simulate_pulsed(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        exc: ExcitationConfig,
        n_pulses: int,
        seed: int,
    ) -> TimeTagStream:
        """The abstract simulating a TRPL measurement.

        Args:
            rates (EmitterRates): The emitter rates.
            det (DetectorConfig): The detector pair.
            exc (ExcitationConfig): The pulsed source.
            n_pulses (int): Number of laser pulses.
            seed (int): The master seed.

        Returns:
            TimeTagStream: SYNC and photon detections.
        """

    @abstractmethod
    def apply_detector(
        self,
        ideal_tags: IdealTags,
        det: DetectorConfig,
        seed: int,
    ) -> TimeTagStream:
        """The abstract passing ideal arrivals through imperfect detectors.

        Args:
            ideal_tags (IdealTags): Time-ordered arrivals.
            det (DetectorConfig): The detector pair.
            seed (int): The master seed.

        Returns:
            TimeTagStream: The detected stream.
        """

    @abstractmethod
    def simulate_saturation_series(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        powers: Sequence[float],
        excitation_per_watt: float,
        duration: float,
        seed: int,
    ) -> list[tuple[float, float]]:
        """The abstract measuring detected count rate versus CW power.

        Args:
            rates (EmitterRates): The emitter rates; excitation is overridden.
            det (DetectorConfig): The detector pair.
            powers (Sequence[float]): Laser powers in watts.
            excitation_per_watt (float): Excitation rate per watt.
            duration (float): Measurement time per power, seconds.
            seed (int): The master seed.

        Returns:
            list[tuple[float, float]]: (power, counts per second) pairs.
        """

    @abstractmethod
    def expected_tag_count(
        self,
        rates: EmitterRates,
        det: DetectorConfig,
        duration: float,
        exc: Optional[ExcitationConfig] = None,
        n_pulses: int = 0,
    ) -> float:
        """The abstract estimating how many records a run allocates.

        Args:
            rates (EmitterRates): The emitter rates.
            det (DetectorConfig): The detector pair.
            duration (float): Measurement time in seconds.
            exc (Optional[ExcitationConfig]): The pulsed source, if any.
            n_pulses (int): Number of pulses for pulsed runs.

        Returns:
            float: Expected number of records.
        """

    @abstractmethod
    def validate_excitation(self, exc: ExcitationConfig) -> str | None:
        """The abstract responsible for validating excitation settings.

        Args:
            exc (ExcitationConfig): The source.

        Returns:
            str | None: Validation status.
        """
