"""Module containing tabular repository abstractions."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Iterable

from pydantic import BaseModel

from emitterkit.core.domain.fit import Spectrum
from emitterkit.core.domain.survey import EmitterRecord


class ITableRepository(ABC):
    """An abstract class representing protocol of table repository."""

    @abstractmethod
    def read_spectrum(self, path: Path) -> Spectrum:
        """The abstract reading a `wavelength_nm,counts` table.

        Args:
            path (Path): Source file.

        Returns:
            Spectrum: The spectrum in SI units.
        """

    @abstractmethod
    def read_saturation(self, path: Path) -> tuple[list[float], list[float]]:
        """The abstract reading a `power_w,intensity_cps` table.

        Args:
            path (Path): Source file.

        Returns:
            tuple[list[float], list[float]]: Powers and intensities.
        """

    @abstractmethod
    def read_calibration(self, path: Path) -> list[tuple[float, float]]:
        """The abstract reading an `afm_thickness_nm,opl_nm` table.

        Args:
            path (Path): Source file.

        Returns:
            list[tuple[float, float]]: (thickness, OPL) pairs in meters.
        """

    @abstractmethod
    def read_records(self, path: Path) -> list[EmitterRecord]:
        """The abstract reading survey records.

        Args:
            path (Path): Source file.

        Returns:
            list[EmitterRecord]: The records in SI units.
        """

    @abstractmethod
    def read_anneal(self, path: Path) -> dict[float, list[float]]:
        """The abstract reading an `anneal_temp,brightness` table.

        Args:
            path (Path): Source file.

        Returns:
            dict[float, list[float]]: Brightness samples per temperature.
        """

    @abstractmethod
    def write_rows(self, rows: Iterable[dict[str, Any]], path: Path, columns: list[str]) -> Path:
        """The abstract writing rows as a versioned CSV table.

        Args:
            rows (Iterable[dict[str, Any]]): The rows.
            path (Path): Target file.
            columns (list[str]): Column order.

        Returns:
            Path: The written file.
        """

    @abstractmethod
    def write_json(self, data: BaseModel | dict, path: Path) -> Path:
        """The abstract writing a versioned JSON document.

        Args:
            data (BaseModel | dict): The document.
            path (Path): Target file.

        Returns:
            Path: The written file.
        """

    @abstractmethod
    def read_json(self, path: Path) -> dict:
        """The abstract reading a JSON document.

        Args:
            path (Path): Source file.

        Returns:
            dict: The parsed document.
        """
