"""Module containing report service implementation."""

import logging
from pathlib import Path

import numpy as np

from emitterkit.core.domain.fit import FitResult
from emitterkit.core.domain.report import CharacterizationReport, ReportRequest
from emitterkit.core.physics.curves import DecayModel, G2Model, PseudoVoigtModel, SaturationModel
from emitterkit.core.physics.photophysics import lifetime_bandwidth_product
from emitterkit.core.repositories.itable import ITableRepository
from emitterkit.core.repositories.itimetag import ITimeTagRepository
from emitterkit.infrastructure.dto.fitresultdto import FitResultDTO
from emitterkit.infrastructure.services.icorrelator import ICorrelatorService
from emitterkit.infrastructure.services.ifitting import IFittingService
from emitterkit.infrastructure.services.ireport import IReportService
from emitterkit.infrastructure.services.isurvey import ISurveyService

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"


def _vector(fit: FitResult, names: tuple[str, ...], scales: dict[str, float]) -> np.ndarray:
    return np.array([fit.params[name] / scales.get(name, 1.0) for name in names])


class ReportService(IReportService):
    """A class implementing the characterization report service.

    Every table carries the data and the fitted curve on the same
    abscissa, ready for plotting.
    """

    _fitting_service: IFittingService
    _correlator_service: ICorrelatorService
    _survey_service: ISurveyService
    _timetag_repository: ITimeTagRepository
    _table_repository: ITableRepository

    def __init__(
        self,
        fitting_service: IFittingService,
        correlator_service: ICorrelatorService,
        survey_service: ISurveyService,
        timetag_repository: ITimeTagRepository,
        table_repository: ITableRepository,
    ) -> None:
        """The initializer of the `report service`.

        Args:
            fitting_service (IFittingService): Reference to fitting service.
            correlator_service (ICorrelatorService): Reference to correlator
                service.
            survey_service (ISurveyService): Reference to survey service.
            timetag_repository (ITimeTagRepository): Reference to time-tag
                repository.
            table_repository (ITableRepository): Reference to table
                repository.
        """

        self._fitting_service = fitting_service
        self._correlator_service = correlator_service
        self._survey_service = survey_service
        self._timetag_repository = timetag_repository
        self._table_repository = table_repository

    def build_report(self, request: ReportRequest, out_dir: Path) -> CharacterizationReport:
        """The method fitting every given measurement and writing tables.

        Writes `report.json` and one CSV per measurement (`spectrum.csv`,
        `g2.csv`, `trpl.csv`, `saturation.csv`) into `out_dir`.

        Args:
            request (ReportRequest): Input files and settings.
            out_dir (Path): Directory receiving the files.

        Returns:
            CharacterizationReport: The fits and table names.
        """

        out_dir = Path(out_dir)
        report = CharacterizationReport()

        if request.spectrum_path:
            self._spectrum(request, out_dir, report)
        if request.hbt_path:
            self._g2(request, out_dir, report)
        if request.trpl_path:
            self._trpl(request, out_dir, report)
        if request.saturation_path:
            self._saturation(request, out_dir, report)

        spectrum, lifetime = report.fits.get("spectrum"), report.fits.get("lifetime")
        if spectrum and lifetime:
            zpl = int(report.summary["zpl_peak"])
            report.summary["lifetime_bandwidth_product"] = lifetime_bandwidth_product(
                spectrum.params[f"peak{zpl}_center"],
                spectrum.params[f"peak{zpl}_fwhm"],
                lifetime.params["lifetime"],
            )

        self._table_repository.write_json(
            {
                "fits": {name: FitResultDTO.from_result(fit).model_dump(mode="json") for name, fit in report.fits.items()},
                "tables": report.tables,
                "summary": report.summary,
                "classification": report.classification,
                "background_lines": report.background_lines,
            },
            out_dir / REPORT_FILE,
        )

        logger.info("report with %d fits written to %s", len(report.fits), out_dir)
        return report

    def _spectrum(self, request: ReportRequest, out_dir: Path, report: CharacterizationReport) -> None:
        spectrum = self._table_repository.read_spectrum(request.spectrum_path)
        fit = self._fitting_service.fit_spectrum(spectrum, request.n_peaks, n_samples=request.n_samples,
                                                 seed=request.seed)

        model = PseudoVoigtModel(request.n_peaks, fit_gauss_fraction=False)
        theta = _vector(fit, model.param_names, {name: 1e-9 for name in model.param_names if name != "baseline"})
        curve = model.evaluate(spectrum.wavelength * 1e9, theta)

        zpl = max(range(request.n_peaks), key=lambda i: fit.derived[f"peak{i}_height"])
        report.fits["spectrum"] = fit
        report.summary["zpl_peak"] = float(zpl)
        report.summary["zpl_fraction"] = self._survey_service.zpl_fraction(spectrum, fit, zpl)
        report.background_lines = self._fitting_service.label_background_peaks(fit)
        report.tables["spectrum"] = self._write(
            out_dir / "spectrum.csv",
            ["wavelength_nm", "counts", "fit"],
            zip(spectrum.wavelength * 1e9, spectrum.counts, curve),
        )

    def _g2(self, request: ReportRequest, out_dir: Path, report: CharacterizationReport) -> None:
        stream = self._timetag_repository.load(request.hbt_path)
        hist = self._correlator_service.correlate(stream, request.g2_bin_width, request.g2_max_lag)
        hist = self._correlator_service.normalize_g2(hist, stream)
        fit = self._fitting_service.fit_g2(hist, n_samples=request.n_samples, seed=request.seed)

        model = G2Model()
        theta = _vector(fit, model.param_names, {
            "excited_lifetime": 1e-9, "shelving_lifetime": 1e-9, "delay_offset": 1e-9,
        })
        curve = model.evaluate(hist.bin_centers / 1e3, theta)

        report.fits["g2"] = fit
        report.summary["g2_zero"] = fit.derived["g2_zero"]
        report.tables["g2"] = self._write(
            out_dir / "g2.csv",
            ["bin_center_ps", "raw_counts", "normalized", "fit"],
            (
                (row["bin_center_ps"], row["raw_counts"], row["normalized"], value)
                for row, value in zip(self._correlator_service.export_rows(hist), curve)
            ),
        )

    def _trpl(self, request: ReportRequest, out_dir: Path, report: CharacterizationReport) -> None:
        stream = self._timetag_repository.load(request.trpl_path)
        decay = self._correlator_service.trpl_histogram(stream, request.trpl_bin_width)
        fit = self._fitting_service.fit_lifetime(decay, n_samples=request.n_samples, seed=request.seed)

        start = float(decay.bin_edges[int(np.argmax(decay.counts))])
        centers = decay.bin_centers
        theta = _vector(fit, DecayModel.param_names, {"lifetime": 1e-9})
        curve = np.where(centers >= start, DecayModel().evaluate((centers - start) / 1e3, theta), np.nan)

        report.fits["lifetime"] = fit
        report.summary["lifetime"] = fit.params["lifetime"]
        report.tables["trpl"] = self._write(
            out_dir / "trpl.csv",
            ["delay_ps", "counts", "fit"],
            zip(centers, decay.counts, curve),
        )

    def _saturation(self, request: ReportRequest, out_dir: Path, report: CharacterizationReport) -> None:
        powers, intensities = self._table_repository.read_saturation(request.saturation_path)
        fit = self._fitting_service.fit_saturation(powers, intensities, n_samples=request.n_samples,
                                                   seed=request.seed)

        theta = np.array([fit.params[name] for name in SaturationModel.param_names])
        curve = SaturationModel().evaluate(np.asarray(powers), theta)

        report.fits["saturation"] = fit
        report.summary["sat_power"] = fit.params["sat_power"]
        if "alpha" in fit.derived:
            report.summary["alpha"] = fit.derived["alpha"]
        report.classification = fit.classification
        report.tables["saturation"] = self._write(
            out_dir / "saturation.csv",
            ["power_w", "intensity_cps", "fit"],
            zip(powers, intensities, curve),
        )

    def _write(self, path: Path, columns: list[str], values) -> str:
        rows = [dict(zip(columns, row)) for row in values]
        self._table_repository.write_rows(rows, path, columns)
        return path.name
