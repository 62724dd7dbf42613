"""Module containing report service abstractions."""

from abc import ABC, abstractmethod
from pathlib import Path

from emitterkit.core.domain.report import CharacterizationReport, ReportRequest


class IReportService(ABC):
    """A class representing report service."""

    @abstractmethod
    def build_report(self, request: ReportRequest, out_dir: Path) -> CharacterizationReport:
        """The abstract fitting every given measurement and writing tables.

        Args:
            request (ReportRequest): Input files and settings.
            out_dir (Path): Directory receiving report.json and CSV tables.

        Returns:
            CharacterizationReport: The fits and table names.
        """
