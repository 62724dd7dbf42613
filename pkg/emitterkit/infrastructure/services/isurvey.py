"""Module containing survey service abstractions."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Literal, Mapping, Optional, Sequence

from emitterkit.core.domain.fit import FitResult, Spectrum
from emitterkit.core.domain.survey import (
    AgingSummary,
    AnnealSummary,
    DensityTrend,
    EmitterMeasurement,
    EmitterRecord,
    LifetimeBandwidthTable,
    SurveyStats,
    TransferReport,
)


class ISurveyService(ABC):
    """A class representing survey service."""

    @abstractmethod
    def defect_density(self, n_defects: int, edge_length: float) -> float:
        """The abstract returning the linear defect density N/L.

        Args:
            n_defects (int): Defects on the flake.
            edge_length (float): Flake perimeter in meters.

        Returns:
            float: Defects per meter.
        """

    @abstractmethod
    def density_trend(
        self,
        records: Sequence[EmitterRecord],
        parameter: Literal["plasma_power", "plasma_time"] = "plasma_power",
    ) -> DensityTrend:
        """The abstract regressing defect density on a fabrication parameter.

        Args:
            records (Sequence[EmitterRecord]): Survey records.
            parameter (Literal["plasma_power", "plasma_time"]): Regressor.

        Returns:
            DensityTrend: Slope, intercept and interval.
        """

    @abstractmethod
    def survey_stats(self, records: Sequence[EmitterRecord]) -> SurveyStats:
        """The abstract summarizing a survey.

        Args:
            records (Sequence[EmitterRecord]): Survey records.

        Returns:
            SurveyStats: The summary.
        """

    @abstractmethod
    def zpl_fraction(self, s: Spectrum, fit: FitResult, zpl_peak: Optional[int] = None) -> float:
        """The abstract returning the share of emission into the ZPL.

        Args:
            s (Spectrum): The spectrum.
            fit (FitResult): Its pseudo-Voigt fit.
            zpl_peak (Optional[int]): ZPL peak index, the tallest by default.

        Returns:
            float: The fraction.
        """

    @abstractmethod
    def lifetime_bandwidth_table(self, records: Sequence[EmitterRecord]) -> LifetimeBandwidthTable:
        """The abstract tabulating Δν·τ per record.

        Args:
            records (Sequence[EmitterRecord]): Survey records.

        Returns:
            LifetimeBandwidthTable: Rows with minimum and mean.
        """

    @abstractmethod
    def compare_emitters(
        self,
        before: EmitterMeasurement,
        after: EmitterMeasurement,
        n_peaks: int = 1,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> TransferReport:
        """The abstract comparing one emitter before and after a transfer.

        Args:
            before (EmitterMeasurement): Data before.
            after (EmitterMeasurement): Data after.
            n_peaks (int): Peaks fitted per spectrum.
            n_samples (Optional[int]): Bootstrap size per fit.
            seed (int): Bootstrap seed.

        Returns:
            TransferReport: Changes with propagated intervals.
        """

    @abstractmethod
    def anneal_brightness_summary(self, groups: Mapping[float, Sequence[float]]) -> AnnealSummary:
        """The abstract aggregating brightness per anneal temperature.

        Args:
            groups (Mapping[float, Sequence[float]]): Samples per temperature.

        Returns:
            AnnealSummary: Mean ± standard deviation per group.
        """

    @abstractmethod
    def aging_summary(self, records: Sequence[EmitterRecord]) -> AgingSummary:
        """The abstract summarizing repeated measurements per defect.

        Args:
            records (Sequence[EmitterRecord]): Survey records.

        Returns:
            AgingSummary: One entry per defect series.
        """

    @abstractmethod
    def validate_record(self, record: EmitterRecord, allow_ensembles: bool = False) -> str | None:
        """The abstract responsible for validating a survey record.

        Args:
            record (EmitterRecord): The record.
            allow_ensembles (bool): Whether ensembles pass.

        Returns:
            str | None: Validation status.
        """

    @abstractmethod
    def ingest_records(self, path: Path, allow_ensembles: bool = False) -> list[EmitterRecord]:
        """The abstract reading and validating a survey table.

        Args:
            path (Path): Source file.
            allow_ensembles (bool): Whether ensembles pass.

        Returns:
            list[EmitterRecord]: The records.
        """
