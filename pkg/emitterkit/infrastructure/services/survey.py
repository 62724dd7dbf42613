"""Module containing survey service implementation."""

import logging
import math
import warnings
from collections import Counter, defaultdict
from pathlib import Path
from typing import Literal, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import erf

from emitterkit.config import AppConfig
from emitterkit.core.domain.fit import FitResult, Spectrum
from emitterkit.core.domain.survey import (
    AgingEntry,
    AgingSummary,
    AnnealGroup,
    AnnealSummary,
    DensityTrend,
    EmitterMeasurement,
    EmitterRecord,
    LifetimeBandwidthTable,
    ProductRow,
    PropertySummary,
    ReportedChange,
    SurveyStats,
    TransferReport,
    ZplBand,
)
from emitterkit.core.errors import (
    DegenerateDesign,
    DegenerateGeometry,
    DomainValidationError,
    EmitterKitError,
    EmptySpectrum,
    EnsembleRecord,
    SmallSampleWarning,
)
from emitterkit.core.physics.photophysics import lifetime_bandwidth_product, linewidth_to_bandwidth
from emitterkit.core.repositories.itable import ITableRepository
from emitterkit.infrastructure.services.icorrelator import ICorrelatorService
from emitterkit.infrastructure.services.ifitting import IFittingService
from emitterkit.infrastructure.services.isurvey import ISurveyService
from emitterkit.infrastructure.utils.consts import ZPL_BAND_START, ZPL_BAND_STOP, ZPL_BAND_WIDTH, Z95

logger = logging.getLogger(__name__)

PROPERTY_FIELDS = {
    "zpl_center": lambda r: r.zpl_center,
    "zpl_fwhm": lambda r: r.zpl_fwhm,
    "lifetime": lambda r: r.lifetime,
    "g2_zero": lambda r: r.g2_zero,
    "alpha": lambda r: r.alpha,
    "zpl_fraction": lambda r: r.zpl_fraction,
    "brightness": lambda r: r.brightness,
    "thickness": lambda r: r.flake.thickness,
    "edge_length": lambda r: r.flake.edge_length,
    "plasma_power": lambda r: r.fabrication.plasma_power,
    "plasma_time": lambda r: r.fabrication.plasma_time,
    "anneal_temp": lambda r: r.fabrication.anneal_temp,
}
CORRELATION_FIELDS = (
    "zpl_fwhm", "lifetime", "g2_zero", "alpha", "thickness", "plasma_power", "plasma_time", "anneal_temp",
)


def window_fraction(center: float, fwhm: float, eta: float, window: tuple[float, float]) -> float:
    """A function returning the share of a unit-area pseudo-Voigt inside a window.

    Args:
        center (float): Peak center.
        fwhm (float): Full width at half maximum.
        eta (float): Gaussian share.
        window (tuple[float, float]): Integration limits.

    Returns:
        float: Fraction of the peak area in the window.
    """

    lower, upper = window
    lorentz = (math.atan(2 * (upper - center) / fwhm) - math.atan(2 * (lower - center) / fwhm)) / math.pi
    scale = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0))) * math.sqrt(2.0)
    gauss = 0.5 * (erf((upper - center) / scale) - erf((lower - center) / scale))
    return eta * float(gauss) + (1.0 - eta) * lorentz


def fitted_peaks(fit: FitResult) -> list[tuple[float, float, float, float]]:
    """A function reading (center, fwhm, area, eta) tuples from a spectrum fit.

    Args:
        fit (FitResult): A pseudo-Voigt fit.

    Returns:
        list[tuple[float, float, float, float]]: Peaks in index order.
    """

    peaks = []
    i = 0
    while f"peak{i}_center" in fit.params:
        peaks.append((
            fit.params[f"peak{i}_center"],
            fit.params[f"peak{i}_fwhm"],
            fit.params[f"peak{i}_area"],
            fit.params.get(f"peak{i}_gauss_fraction", 0.0),
        ))
        i += 1
    return peaks


def _difference(before: tuple[float, float], after: tuple[float, float]) -> ReportedChange:
    change = after[0] - before[0]
    half = math.hypot(before[1], after[1])
    return ReportedChange(before=before[0], after=after[0], change=change, ci95=(change - half, change + half))


def _ratio(before: tuple[float, float], after: tuple[float, float]) -> ReportedChange:
    if before[0] == 0:
        raise DomainValidationError("ratio to a zero reference")
    ratio = after[0] / before[0]
    relative = math.hypot(before[1] / before[0], after[1] / after[0] if after[0] else 0.0)
    half = abs(ratio) * relative
    return ReportedChange(before=before[0], after=after[0], change=ratio, ci95=(ratio - half, ratio + half))


class SurveyService(ISurveyService):
    """A class implementing the survey service."""

    _fitting_service: IFittingService
    _correlator_service: ICorrelatorService
    _repository: ITableRepository
    _config: AppConfig

    def __init__(
        self,
        fitting_service: IFittingService,
        correlator_service: ICorrelatorService,
        repository: ITableRepository,
        config: AppConfig,
    ) -> None:
        """The initializer of the `survey service`.

        Args:
            fitting_service (IFittingService): Reference to fitting service.
            correlator_service (ICorrelatorService): Reference to correlator
                service.
            repository (ITableRepository): Reference to table repository.
            config (AppConfig): The toolkit configuration.
        """

        self._fitting_service = fitting_service
        self._correlator_service = correlator_service
        self._repository = repository
        self._config = config

    def defect_density(self, n_defects: int, edge_length: float) -> float:
        """The method returning the linear defect density ρ = N/L.

        Args:
            n_defects (int): Defects on the flake.
            edge_length (float): Flake perimeter in meters.

        Raises:
            DegenerateGeometry: For a non-positive edge length.

        Returns:
            float: Defects per meter.
        """

        if edge_length <= 0:
            raise DegenerateGeometry("edge length must be positive", edge_length=edge_length)
        if n_defects < 0:
            raise DomainValidationError("defect count must be non-negative", n_defects=n_defects)

        return n_defects / edge_length

    def density_trend(
        self,
        records: Sequence[EmitterRecord],
        parameter: Literal["plasma_power", "plasma_time"] = "plasma_power",
    ) -> DensityTrend:
        """The method regressing ρ = N/L on a fabrication parameter.

        Flakes are weighted by L²/max(N, 1), the inverse Poisson variance
        of their density. Flakes lacking the parameter or the edge length
        are skipped.

        Args:
            records (Sequence[EmitterRecord]): Survey records.
            parameter (Literal["plasma_power", "plasma_time"]): Regressor.

        Raises:
            DegenerateDesign: For fewer than two distinct parameter values.

        Returns:
            DensityTrend: Slope, intercept and slope interval.
        """

        flakes: dict[str, list[EmitterRecord]] = defaultdict(list)
        for record in records:
            flakes[record.flake_id].append(record)

        x, rho, weight = [], [], []
        for flake_id, rows in sorted(flakes.items()):
            value = next((getattr(r.fabrication, parameter) for r in rows
                          if getattr(r.fabrication, parameter) is not None), None)
            length = next((r.flake.edge_length for r in rows if r.flake.edge_length is not None), None)
            if value is None or length is None:
                logger.warning("flake %s lacks %s or edge length, skipped", flake_id, parameter)
                continue

            count = sum(r.hosts_defect for r in rows)
            x.append(value)
            rho.append(self.defect_density(count, length))
            weight.append(length**2 / max(count, 1))

        if np.unique(x).size < 2:
            raise DegenerateDesign(f"density trend needs two distinct {parameter} values")

        coefficients, cov = np.polyfit(x, rho, 1, w=np.sqrt(weight), cov="unscaled")
        slope, intercept = float(coefficients[0]), float(coefficients[1])
        half = Z95 * float(np.sqrt(cov[0, 0]))

        trend = DensityTrend(
            parameter=parameter,
            slope=slope,
            intercept=intercept,
            slope_ci95=(slope - half, slope + half),
            compatible_with_zero=slope - half <= 0 <= slope + half,
            n_flakes=len(x),
        )

        logger.info("density trend vs %s: slope %.4g over %d flakes", parameter, slope, len(x))
        return trend

    def survey_stats(self, records: Sequence[EmitterRecord]) -> SurveyStats:
        """The method summarizing a survey.

        Rows without a defect count as flakes only. The per-flake mean
        leaves out flakes hosting no defect. Correlations are Pearson
        over pairwise-complete values, absent where undefined.

        Args:
            records (Sequence[EmitterRecord]): Survey records.

        Raises:
            DomainValidationError: For an empty survey.

        Returns:
            SurveyStats: The summary.
        """

        if not records:
            raise DomainValidationError("survey holds no record")

        # canonical order keeps floating point sums permutation invariant
        records = sorted(records, key=lambda r: r.model_dump_json())
        defects = [r for r in records if r.hosts_defect]
        hosting = Counter(r.flake_id for r in defects)

        frame = pd.DataFrame(
            [{name: getter(r) for name, getter in PROPERTY_FIELDS.items()} for r in defects],
            columns=list(PROPERTY_FIELDS),
            dtype=float,
        )

        properties = {}
        for name in PROPERTY_FIELDS:
            column = frame[name].dropna()
            if not column.empty:
                properties[name] = PropertySummary(
                    n=int(column.size),
                    minimum=float(column.min()),
                    maximum=float(column.max()),
                    mean=float(column.mean()),
                )

        matrix = frame[list(CORRELATION_FIELDS)].corr(method="pearson", min_periods=2)
        correlation = {
            row: {
                column: None if pd.isna(matrix.loc[row, column]) else float(np.clip(matrix.loc[row, column], -1, 1))
                for column in CORRELATION_FIELDS
            }
            for row in CORRELATION_FIELDS
        }

        stats = SurveyStats(
            n_flakes=len({r.flake_id for r in records}),
            n_defects=len(defects),
            mean_defects_per_hosting_flake=float(np.mean(list(hosting.values()))) if hosting else None,
            zpl_histogram=self._zpl_histogram(defects),
            properties=properties,
            correlation=correlation,
        )

        logger.info("survey: %d flakes, %d defects", stats.n_flakes, stats.n_defects)
        return stats

    def zpl_fraction(self, s: Spectrum, fit: FitResult, zpl_peak: Optional[int] = None) -> float:
        """The method returning the share of emission into the ZPL.

        The ZPL peak's fitted area over the summed fitted areas of all
        peaks, every area truncated to the recorded window and the
        baseline excluded.

        Args:
            s (Spectrum): The spectrum.
            fit (FitResult): Its pseudo-Voigt fit.
            zpl_peak (Optional[int]): ZPL peak index, the tallest by default.

        Raises:
            EmptySpectrum: When the fitted peaks carry no area.

        Returns:
            float: The fraction.
        """

        peaks = fitted_peaks(fit)
        if not peaks:
            raise DomainValidationError("fit holds no peak")

        if zpl_peak is None:
            zpl_peak = self._tallest(fit, peaks)
        elif not 0 <= zpl_peak < len(peaks):
            raise DomainValidationError("ZPL peak index out of range", zpl_peak=zpl_peak)

        areas = [area * window_fraction(center, fwhm, eta, s.window) for center, fwhm, area, eta in peaks]
        total = sum(areas)
        if total <= 0:
            raise EmptySpectrum("fitted peaks carry no area in the window")

        return areas[zpl_peak] / total

    def lifetime_bandwidth_table(self, records: Sequence[EmitterRecord]) -> LifetimeBandwidthTable:
        """The method tabulating Δν·τ per record.

        Records lacking center, linewidth or lifetime are skipped with a
        warning.

        Args:
            records (Sequence[EmitterRecord]): Survey records.

        Returns:
            LifetimeBandwidthTable: Rows with minimum and mean.
        """

        rows, skipped = [], []
        for record in records:
            if not record.hosts_defect:
                continue
            label = f"{record.flake_id}/{record.defect_id}"
            if record.zpl_center is None or not record.zpl_fwhm or record.lifetime is None:
                logger.warning("record %s lacks center, linewidth or lifetime, skipped", label)
                skipped.append(label)
                continue

            rows.append(ProductRow(
                flake_id=record.flake_id,
                defect_id=record.defect_id,
                bandwidth=linewidth_to_bandwidth(record.zpl_center, record.zpl_fwhm),
                lifetime=record.lifetime,
                product=lifetime_bandwidth_product(record.zpl_center, record.zpl_fwhm, record.lifetime),
            ))

        products = [row.product for row in rows]
        return LifetimeBandwidthTable(
            rows=rows,
            skipped=skipped,
            minimum=min(products) if products else None,
            mean=float(np.mean(products)) if products else None,
        )

    def compare_emitters(
        self,
        before: EmitterMeasurement,
        after: EmitterMeasurement,
        n_peaks: int = 1,
        n_samples: Optional[int] = None,
        seed: int = 0,
    ) -> TransferReport:
        """The method comparing one emitter before and after a transfer.

        Both data sets are fitted with the same settings; differences and
        ratios carry intervals from the fit half widths added in
        quadrature.

        Args:
            before (EmitterMeasurement): Data before.
            after (EmitterMeasurement): Data after.
            n_peaks (int): Peaks fitted per spectrum.
            n_samples (Optional[int]): Bootstrap size per fit.
            seed (int): Bootstrap seed.

        Returns:
            TransferReport: Changes with propagated intervals.
        """

        first = self._characterize(before, "before", n_peaks, n_samples, seed)
        second = self._characterize(after, "after", n_peaks, n_samples, seed)

        report = TransferReport(
            zpl_shift=_difference(first["center"], second["center"]),
            brightness_ratio=_ratio(first["height"], second["height"]),
            fwhm_change=_difference(first["fwhm"], second["fwhm"]),
            lifetime_change=_difference(first["lifetime"], second["lifetime"]),
            g2_zero_change=_difference(first["g2_zero"], second["g2_zero"]),
            zpl_fraction_change=_difference(first["fraction"], second["fraction"]),
        )

        logger.info(
            "transfer: ZPL shift %.3f nm, brightness ratio %.4f",
            report.zpl_shift.change * 1e9, report.brightness_ratio.change,
        )
        return report

    def anneal_brightness_summary(self, groups: Mapping[float, Sequence[float]]) -> AnnealSummary:
        """The method aggregating brightness per anneal temperature.

        Ties on the maximal mean are reported and broken towards the lowest
        temperature.

        Args:
            groups (Mapping[float, Sequence[float]]): Samples per temperature.

        Raises:
            DomainValidationError: For no group or an empty group.

        Returns:
            AnnealSummary: Mean ± sample standard deviation per group.
        """

        if not groups:
            raise DomainValidationError("no anneal group given")

        summary = []
        for temperature in sorted(groups):
            samples = np.asarray(groups[temperature], dtype=np.float64)
            if samples.size == 0:
                raise DomainValidationError("anneal group holds no sample", temperature=temperature)

            small = samples.size == 1
            if small:
                message = f"single brightness sample at {temperature}, std reported as 0"
                warnings.warn(message, SmallSampleWarning, stacklevel=2)
                logger.warning(message)
            summary.append(AnnealGroup(
                temperature=float(temperature),
                mean=float(samples.mean()),
                std=0.0 if small else float(samples.std(ddof=1)),
                n=int(samples.size),
                small_sample=small,
            ))

        means = np.array([group.mean for group in summary])
        best_mean = float(means.max())
        tied = [group.temperature for group in summary if np.isclose(group.mean, best_mean, rtol=1e-12, atol=0.0)]
        best = next(i for i, group in enumerate(summary) if group.temperature == tied[0])

        floor = best_mean - summary[best].std
        lower = upper = best
        while lower > 0 and means[lower - 1] >= floor:
            lower -= 1
        while upper < len(summary) - 1 and means[upper + 1] >= floor:
            upper += 1

        if len(tied) > 1:
            logger.warning("anneal temperatures %s tie on brightness, picked %s", tied, tied[0])

        return AnnealSummary(
            groups=summary,
            best_temperature=tied[0],
            band_lower=summary[lower].temperature,
            band_upper=summary[upper].temperature,
            tied_temperatures=tied,
        )

    def aging_summary(self, records: Sequence[EmitterRecord]) -> AgingSummary:
        """The method summarizing repeated measurements per defect.

        Only dated records of defects measured at least twice enter; no
        aging model is fitted.

        Args:
            records (Sequence[EmitterRecord]): Survey records.

        Returns:
            AgingSummary: One entry per defect series.
        """

        series: dict[tuple[str, str], list[EmitterRecord]] = defaultdict(list)
        for record in records:
            if record.hosts_defect and record.measured_at is not None:
                series[(record.flake_id, record.defect_id)].append(record)

        entries = []
        for (flake_id, defect_id), rows in sorted(series.items()):
            if len(rows) < 2:
                continue
            rows = sorted(rows, key=lambda r: r.measured_at)
            centers = [r.zpl_center for r in rows if r.zpl_center is not None]
            widths = [r.zpl_fwhm for r in rows if r.zpl_fwhm is not None]
            entries.append(AgingEntry(
                flake_id=flake_id,
                defect_id=defect_id,
                n_points=len(rows),
                first_measured=rows[0].measured_at,
                last_measured=rows[-1].measured_at,
                zpl_span=max(centers) - min(centers) if centers else None,
                first_fwhm=widths[0] if widths else None,
                last_fwhm=widths[-1] if widths else None,
            ))

        return AgingSummary(entries=entries)

    def validate_record(self, record: EmitterRecord, allow_ensembles: bool = False) -> str | None:
        """The method responsible for validating a survey record.

        Args:
            record (EmitterRecord): The record.
            allow_ensembles (bool): Whether g²(0) above the ensemble
                threshold passes.

        Returns:
            str | None: Validation status.
        """

        if record.zpl_fraction is not None and not 0 <= record.zpl_fraction <= 1:
            return "record-zpl-fraction-invalid"

        if record.single_emitter and record.g2_zero is not None:
            if record.g2_zero > self._config.ENSEMBLE_THRESHOLD and not allow_ensembles:
                return "record-g2-ensemble"
            if record.g2_zero > 1:
                return "record-g2-invalid"

        return None

    def ingest_records(self, path: Path, allow_ensembles: bool = False) -> list[EmitterRecord]:
        """The method reading and validating a survey table.

        Args:
            path (Path): Source file.
            allow_ensembles (bool): Whether ensembles pass.

        Raises:
            EnsembleRecord: For a single emitter with g²(0) above threshold.
            DomainValidationError: For any other invalid record.

        Returns:
            list[EmitterRecord]: The records.
        """

        records = self._repository.read_records(path)
        for record in records:
            label = f"{record.flake_id}/{record.defect_id}"
            match self.validate_record(record, allow_ensembles):
                case "record-g2-ensemble":
                    raise EnsembleRecord(
                        f"record {label} has g2(0) = {record.g2_zero} and is an ensemble",
                        threshold=self._config.ENSEMBLE_THRESHOLD,
                    )
                case None:
                    pass
                case status:
                    raise DomainValidationError(f"record {label} is invalid", status=status)

        logger.info("ingested %d records from %s", len(records), path)
        return records

    @staticmethod
    def _zpl_histogram(defects: Sequence[EmitterRecord]) -> list[ZplBand]:
        n_bands = int(round((ZPL_BAND_STOP - ZPL_BAND_START) / ZPL_BAND_WIDTH))
        edges = ZPL_BAND_START + ZPL_BAND_WIDTH * np.arange(n_bands + 1)

        bands = [ZplBand(label=f"<{edges[0] * 1e9:.0f} nm", upper=float(edges[0]))]
        bands += [
            ZplBand(label=f"{lo * 1e9:.0f}-{hi * 1e9:.0f} nm", lower=float(lo), upper=float(hi))
            for lo, hi in zip(edges[:-1], edges[1:])
        ]
        bands.append(ZplBand(label=f">={edges[-1] * 1e9:.0f} nm", lower=float(edges[-1])))
        bands.append(ZplBand(label="unknown"))

        for record in defects:
            if record.zpl_center is None:
                bands[-1].count += 1
            else:
                bands[int(np.searchsorted(edges, record.zpl_center, side="right"))].count += 1
        return bands

    @staticmethod
    def _tallest(fit: FitResult, peaks: list[tuple[float, float, float, float]]) -> int:
        heights = [fit.derived.get(f"peak{i}_height", area / fwhm) for i, (_, fwhm, area, _) in enumerate(peaks)]
        return int(np.argmax(heights))

    def _characterize(
        self,
        measurement: EmitterMeasurement,
        stage: str,
        n_peaks: int,
        n_samples: Optional[int],
        seed: int,
    ) -> dict[str, tuple[float, float]]:
        try:
            spectrum = self._fitting_service.fit_spectrum(measurement.spectrum, n_peaks, n_samples=n_samples, seed=seed)
            decay = self._fitting_service.fit_lifetime(measurement.decay, n_samples=n_samples, seed=seed)
            g2 = measurement.g2
            if g2.normalized is None:
                g2 = self._correlator_service.normalize_g2(g2)
            antibunching = self._fitting_service.fit_g2(g2, n_samples=n_samples, seed=seed)
        except EmitterKitError as error:
            error.context["stage"] = stage
            logger.warning("%s characterization failed: %s", stage, error)
            raise

        peaks = fitted_peaks(spectrum)
        zpl = self._tallest(spectrum, peaks)
        prefix = f"peak{zpl}"
        fraction = self.zpl_fraction(measurement.spectrum, spectrum, zpl)
        area = spectrum.params[f"{prefix}_area"]
        area_half = spectrum.half_width(f"{prefix}_area")

        return {
            "center": (spectrum.params[f"{prefix}_center"], spectrum.half_width(f"{prefix}_center")),
            "fwhm": (spectrum.params[f"{prefix}_fwhm"], spectrum.half_width(f"{prefix}_fwhm")),
            "height": (spectrum.derived[f"{prefix}_height"], spectrum.half_width(f"{prefix}_height")),
            "fraction": (fraction, fraction * area_half / area if area else 0.0),
            "lifetime": (decay.params["lifetime"], decay.half_width("lifetime")),
            "g2_zero": (antibunching.derived["g2_zero"], antibunching.half_width("g2_zero")),
        }
