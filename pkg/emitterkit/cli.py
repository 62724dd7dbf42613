"""Command line surface of the toolkit.

Every subcommand reads flat files, calls one service and writes JSON or
CSV. Exit codes: 0 success, 2 invalid input, 3 fit failure, 4 I/O error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from emitterkit.config import config
from emitterkit.container import Container
from emitterkit.core.domain.fit import FitResult
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.domain.photons import DetectorConfig, EmitterRates, ExcitationConfig, ExcitationMode
from emitterkit.core.domain.report import ReportRequest
from emitterkit.core.domain.survey import EmitterMeasurement
from emitterkit.core.errors import DomainValidationError, EmitterKitError, NotConverged
from emitterkit.infrastructure.dto.curvedto import CURVE_COLUMNS, OplCurveDTO
from emitterkit.infrastructure.dto.fitresultdto import FitResultDTO
from emitterkit.infrastructure.dto.histogramdto import (
    CORRELATION_COLUMNS,
    DECAY_COLUMNS,
    CorrelationHistogramDTO,
    DecayHistogramDTO,
)
from emitterkit.utils.logs import configure_logging

logger = logging.getLogger(__name__)

FIT_COLUMNS = ["parameter", "value", "ci95_lower", "ci95_upper", "cov_ci95_lower", "cov_ci95_upper"]
SERIES_COLUMNS = ["power_w", "intensity_cps"]
NM = 1e-9


def _fit_rows(fit: FitResult) -> list[dict[str, Any]]:
    rows = []
    for name, value in {**fit.params, **fit.derived}.items():
        lower, upper = fit.ci95.get(name, (None, None))
        cov_lower, cov_upper = fit.cov_ci95.get(name, (None, None))
        rows.append({
            "parameter": name,
            "value": value,
            "ci95_lower": lower,
            "ci95_upper": upper,
            "cov_ci95_lower": cov_lower,
            "cov_ci95_upper": cov_upper,
        })
    return rows


class Runner:
    """A class dispatching parsed arguments to the container's services."""

    def __init__(self, container: Container, args: argparse.Namespace) -> None:
        """The initializer of the command runner.

        Args:
            container (Container): The dependency container.
            args (argparse.Namespace): Parsed arguments.
        """

        self.container = container
        self.args = args
        self.tables = container.table_repository()
        self.tags = container.timetag_repository()

    def emit(
        self,
        document: dict[str, Any],
        rows: Optional[list[dict[str, Any]]] = None,
        columns: Optional[list[str]] = None,
    ) -> None:
        """The method writing a result to `--out` or standard output.

        Args:
            document (dict[str, Any]): The JSON form.
            rows (Optional[list[dict[str, Any]]]): The CSV form.
            columns (Optional[list[str]]): CSV column order.
        """

        as_csv = self.args.format == "csv" and rows is not None
        out = self.args.out

        if out is not None:
            if as_csv:
                self.tables.write_rows(rows, out, columns)
            else:
                self.tables.write_json(document, out)
            return

        if as_csv:
            sys.stdout.write(f"# schema_version: {config.SCHEMA_VERSION}\n")
            pd.DataFrame(rows, columns=columns).to_csv(sys.stdout, index=False, float_format="%.10g")
        else:
            document.setdefault("schema_version", config.SCHEMA_VERSION)
            sys.stdout.write(json.dumps(document, indent=2, sort_keys=True) + "\n")

    def emit_fit(self, fit: FitResult) -> None:
        """The method writing a fit result.

        Args:
            fit (FitResult): The fit.
        """

        self.emit(FitResultDTO.from_result(fit).model_dump(mode="json"), _fit_rows(fit), FIT_COLUMNS)

    def load_correlation(self, path: Path) -> CorrelationHistogram:
        """The method reading a normalized histogram or correlating a tag file.

        Args:
            path (Path): A `correlate` JSON output or an ETT1 file.

        Returns:
            CorrelationHistogram: The normalized histogram.
        """

        correlator = self.container.correlator_service()
        if Path(path).suffix == ".json":
            hist = CorrelationHistogramDTO(**self.tables.read_json(path)).to_histogram()
            return hist if hist.normalized is not None else correlator.normalize_g2(hist)

        stream = self.tags.load(path)
        hist = correlator.correlate(stream, self.args.bin_width, self.args.max_lag)
        return correlator.normalize_g2(hist, stream)

    def load_decay(self, path: Path) -> DecayHistogram:
        """The method reading a decay histogram or building one from tags.

        Args:
            path (Path): A `trpl` JSON output or an ETT1 file with SYNC tags.

        Returns:
            DecayHistogram: The histogram.
        """

        if Path(path).suffix == ".json":
            return DecayHistogramDTO(**self.tables.read_json(path)).to_histogram()

        stream = self.tags.load(path)
        bin_width = getattr(self.args, "trpl_bin_width", self.args.bin_width)
        return self.container.correlator_service().trpl_histogram(stream, bin_width)

    def simulate(self) -> None:
        args = self.args
        service = self.container.simulation_service()
        rates = EmitterRates(
            excitation_rate=args.excitation_rate,
            radiative_rate=args.radiative_rate,
            intersystem_rate=args.intersystem_rate,
            deshelving_rate=args.deshelving_rate,
            quantum_efficiency=args.quantum_efficiency,
        )
        det = DetectorConfig(
            efficiency=args.efficiency,
            dark_rate=args.dark_rate,
            dead_time=args.dead_time,
            timing_jitter_sigma=args.jitter,
        )

        if args.series:
            if args.excitation_per_watt is None:
                raise DomainValidationError("--series needs --excitation-per-watt")
            series = service.simulate_saturation_series(
                rates, det, args.series, args.excitation_per_watt, args.duration, args.seed,
            )
            rows = [dict(zip(SERIES_COLUMNS, pair)) for pair in series]
            self.emit({"series": rows}, rows, SERIES_COLUMNS)
            return

        if args.out is None:
            raise DomainValidationError("simulate writes a tag file and needs --out")

        if args.mode == "pulsed":
            exc = ExcitationConfig(
                mode=ExcitationMode.PULSED,
                excitation_probability=args.excitation_probability,
                pulse_length=args.pulse_length,
                rep_rate=args.rep_rate,
            )
            stream = service.simulate_pulsed(rates, det, exc, args.n_pulses, args.seed)
        else:
            stream = service.simulate_cw(rates, det, args.duration, args.seed)

        self.tags.save(stream, args.out)

    def correlate(self) -> None:
        args = self.args
        service = self.container.correlator_service()
        stream = self.tags.load(args.input)
        hist = service.correlate(stream, args.bin_width, args.max_lag, args.mode, args.binning, args.n_log_bins)
        if args.normalize != "none":
            hist = service.normalize_g2(hist, stream, args.normalize)

        self.emit(
            CorrelationHistogramDTO.from_histogram(hist).model_dump(mode="json"),
            service.export_rows(hist),
            CORRELATION_COLUMNS,
        )

    def trpl(self) -> None:
        args = self.args
        stream = self.tags.load(args.input)
        hist = self.container.correlator_service().trpl_histogram(stream, args.bin_width, args.period)

        self.emit(
            DecayHistogramDTO.from_histogram(hist).model_dump(mode="json"),
            DecayHistogramDTO.rows(hist),
            DECAY_COLUMNS,
        )

    def fit_g2(self) -> None:
        hist = self.load_correlation(self.args.input)
        fit = self.container.fitting_service().fit_g2(hist, n_samples=self.args.samples, seed=self.args.seed)
        self.emit_fit(fit)

    def fit_lifetime(self) -> None:
        args = self.args
        decay = self.load_decay(args.input)
        fit = self.container.fitting_service().fit_lifetime(
            decay,
            fit_window=tuple(args.window) if args.window else None,
            n_samples=args.samples,
            seed=args.seed,
        )
        self.emit_fit(fit)

    def fit_saturation(self) -> None:
        powers, intensities = self.tables.read_saturation(self.args.input)
        fit = self.container.fitting_service().fit_saturation(
            powers, intensities, n_samples=self.args.samples, seed=self.args.seed,
        )
        self.emit_fit(fit)

    def fit_spectrum(self) -> None:
        args = self.args
        spectrum = self.tables.read_spectrum(args.input)
        fitting = self.container.fitting_service()
        fit = fitting.fit_spectrum(
            spectrum,
            args.n_peaks,
            fit_gauss_fraction=args.fit_gauss_fraction,
            n_samples=args.samples,
            seed=args.seed,
        )
        labels = fitting.label_background_peaks(fit)
        if labels:
            logger.info("background lines: %s", labels)
        self.emit_fit(fit)

    def thinfilm(self) -> None:
        args = self.args
        service = self.container.thinfilm_service()
        wavelength = args.wavelength * NM if args.wavelength else None
        stack = service.default_stack(wavelength)

        if args.action == "calibrate":
            if args.input is None:
                raise DomainValidationError("thinfilm calibrate needs a calibration table")
            estimate = service.fit_index(
                self.tables.read_calibration(args.input),
                stack,
                wavelength=wavelength,
                n_samples=args.samples,
                seed=args.seed,
            )
            self.emit(estimate.model_dump(mode="json"))
            return

        curve = service.build_opl_curve(
            stack,
            complex(args.flake_n, args.flake_k),
            (args.start * NM, args.stop * NM),
            wavelength=wavelength,
            step=args.step * NM if args.step else None,
        )

        if args.action == "curve":
            self.emit(OplCurveDTO.from_curve(curve).model_dump(mode="json"), service.curve_rows(curve),
                      CURVE_COLUMNS)
            return

        if args.opl is None:
            raise DomainValidationError("thinfilm invert needs --opl")
        estimate = service.invert_opl(curve, args.opl * NM)
        if estimate.ambiguous:
            logger.warning("OPL %.2f nm maps to %d thicknesses", args.opl, len(estimate.candidates))
        self.emit(estimate.model_dump(mode="json"))

    def survey(self) -> None:
        args = self.args
        service = self.container.survey_service()
        records = service.ingest_records(args.input, args.allow_ensembles)

        document: dict[str, Any] = {
            "stats": service.survey_stats(records).model_dump(mode="json"),
            "lifetime_bandwidth": service.lifetime_bandwidth_table(records).model_dump(mode="json"),
            "aging": service.aging_summary(records).model_dump(mode="json"),
        }
        if args.trend:
            document["density_trend"] = service.density_trend(records, args.trend).model_dump(mode="json")
        if args.anneal:
            groups = self.tables.read_anneal(args.anneal)
            document["anneal"] = service.anneal_brightness_summary(groups).model_dump(mode="json")

        self.emit(document)

    def compare(self) -> None:
        args = self.args
        before = self._measurement("before", args.before_spectrum, args.before_trpl, args.before_hbt)
        after = self._measurement("after", args.after_spectrum, args.after_trpl, args.after_hbt)

        report = self.container.survey_service().compare_emitters(
            before, after, n_peaks=args.n_peaks, n_samples=args.samples, seed=args.seed,
        )
        self.emit(report.model_dump(mode="json"))

    def report(self) -> None:
        args = self.args
        if args.out is None:
            raise DomainValidationError("report needs --out for its directory")

        request = ReportRequest(
            spectrum_path=args.spectrum,
            hbt_path=args.hbt,
            trpl_path=args.trpl,
            saturation_path=args.saturation,
            n_peaks=args.n_peaks,
            g2_bin_width=args.bin_width,
            g2_max_lag=args.max_lag,
            trpl_bin_width=args.trpl_bin_width,
            n_samples=args.samples,
            seed=args.seed,
        )
        self.container.report_service().build_report(request, args.out)

    def _measurement(self, label: str, spectrum: Path, trpl: Path, hbt: Path) -> EmitterMeasurement:
        return EmitterMeasurement(
            spectrum=self.tables.read_spectrum(spectrum),
            decay=self.load_decay(trpl),
            g2=self.load_correlation(hbt),
            label=label,
        )


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    parser.add_argument("--out", type=Path, default=None, help="output path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--log-level", default=None, help="overrides EMITTERKIT_LOG_LEVEL")
    parser.add_argument("--samples", type=int, default=None,
                        help="bootstrap size, 0 to skip (default: MC_SAMPLES)")


def _powers(value: str) -> list[float]:
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"invalid power list {value!r}") from error


def _histogram_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bin-width", type=int, default=100, help="bin width in ps")
    parser.add_argument("--max-lag", type=int, default=50_000, help="largest |delay| in ps")


def build_parser() -> argparse.ArgumentParser:
    """A function building the argument parser.

    Returns:
        argparse.ArgumentParser: The parser with every subcommand.
    """

    parser = argparse.ArgumentParser(prog="emitterkit", description="Single-photon emitter analysis toolkit.")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="simulate an HBT time-tag stream")
    simulate.add_argument("--mode", choices=("cw", "pulsed"), default="cw")
    simulate.add_argument("--excitation-rate", type=float, default=1e8)
    simulate.add_argument("--radiative-rate", type=float, default=1e9)
    simulate.add_argument("--intersystem-rate", type=float, default=0.0)
    simulate.add_argument("--deshelving-rate", type=float, default=0.0)
    simulate.add_argument("--quantum-efficiency", type=float, default=1.0)
    simulate.add_argument("--efficiency", type=float, default=1.0)
    simulate.add_argument("--dark-rate", type=float, default=0.0)
    simulate.add_argument("--dead-time", type=float, default=0.0)
    simulate.add_argument("--jitter", type=float, default=0.0, help="timing jitter sigma in seconds")
    simulate.add_argument("--duration", type=float, default=1.0, help="seconds (cw and --series)")
    simulate.add_argument("--n-pulses", type=int, default=1_000_000)
    simulate.add_argument("--rep-rate", type=float, default=20.8e6)
    simulate.add_argument("--pulse-length", type=float, default=300e-15)
    simulate.add_argument("--excitation-probability", type=float, default=1.0)
    simulate.add_argument("--series", type=_powers, default=None, help="comma separated powers in W")
    simulate.add_argument("--excitation-per-watt", type=float, default=None)
    _common(simulate)

    correlate = commands.add_parser("correlate", help="build a g2 histogram from tags")
    correlate.add_argument("input", type=Path)
    _histogram_flags(correlate)
    correlate.add_argument("--mode", choices=("full", "start_stop"), default="full")
    correlate.add_argument("--binning", choices=("uniform", "log"), default="uniform")
    correlate.add_argument("--n-log-bins", type=int, default=None)
    correlate.add_argument("--normalize", choices=("analytic", "empirical", "none"), default="analytic")
    _common(correlate)

    trpl = commands.add_parser("trpl", help="build a decay histogram from tags")
    trpl.add_argument("input", type=Path)
    trpl.add_argument("--bin-width", type=int, default=16, help="bin width in ps")
    trpl.add_argument("--period", type=float, default=None, help="pulse period in ps")
    _common(trpl)

    fit_g2 = commands.add_parser("fit-g2", help="fit the three-level g2 model")
    fit_g2.add_argument("input", type=Path, help="tag file or correlate JSON")
    _histogram_flags(fit_g2)
    _common(fit_g2)

    fit_lifetime = commands.add_parser("fit-lifetime", help="fit a mono-exponential decay")
    fit_lifetime.add_argument("input", type=Path, help="tag file or trpl JSON")
    fit_lifetime.add_argument("--bin-width", type=int, default=16, help="bin width in ps")
    fit_lifetime.add_argument("--window", type=float, nargs=2, default=None, metavar=("START", "STOP"),
                              help="fit window in ps")
    _common(fit_lifetime)

    fit_saturation = commands.add_parser("fit-saturation", help="fit saturation and power law")
    fit_saturation.add_argument("input", type=Path)
    _common(fit_saturation)

    fit_spectrum = commands.add_parser("fit-spectrum", help="fit pseudo-Voigt peaks")
    fit_spectrum.add_argument("input", type=Path)
    fit_spectrum.add_argument("--n-peaks", type=int, default=1)
    fit_spectrum.add_argument("--fit-gauss-fraction", action="store_true")
    _common(fit_spectrum)

    thinfilm = commands.add_parser("thinfilm", help="OPL curve, inversion and index calibration")
    thinfilm.add_argument("action", choices=("curve", "invert", "calibrate"))
    thinfilm.add_argument("input", type=Path, nargs="?", default=None, help="calibration table")
    thinfilm.add_argument("--flake-n", type=float, default=1.849)
    thinfilm.add_argument("--flake-k", type=float, default=0.0)
    thinfilm.add_argument("--start", type=float, default=0.0, help="nm")
    thinfilm.add_argument("--stop", type=float, default=60.0, help="nm")
    thinfilm.add_argument("--step", type=float, default=None, help="nm")
    thinfilm.add_argument("--wavelength", type=float, default=None, help="nm")
    thinfilm.add_argument("--opl", type=float, default=None, help="measured OPL in nm")
    _common(thinfilm)

    survey = commands.add_parser("survey", help="survey statistics")
    survey.add_argument("input", type=Path)
    survey.add_argument("--allow-ensembles", action="store_true")
    survey.add_argument("--trend", choices=("plasma_power", "plasma_time"), default=None)
    survey.add_argument("--anneal", type=Path, default=None, help="anneal_temp,brightness table")
    _common(survey)

    compare = commands.add_parser("compare", help="compare an emitter before and after a transfer")
    for side in ("before", "after"):
        compare.add_argument(f"--{side}-spectrum", type=Path, required=True)
        compare.add_argument(f"--{side}-trpl", type=Path, required=True)
        compare.add_argument(f"--{side}-hbt", type=Path, required=True)
    compare.add_argument("--n-peaks", type=int, default=1)
    _histogram_flags(compare)
    compare.add_argument("--trpl-bin-width", type=int, default=16)
    _common(compare)

    report = commands.add_parser("report", help="full characterization report")
    report.add_argument("--spectrum", type=Path, default=None)
    report.add_argument("--hbt", type=Path, default=None)
    report.add_argument("--trpl", type=Path, default=None)
    report.add_argument("--saturation", type=Path, default=None)
    report.add_argument("--n-peaks", type=int, default=1)
    _histogram_flags(report)
    report.add_argument("--trpl-bin-width", type=int, default=16)
    _common(report)

    return parser


def main(argv: Optional[Sequence[str]] = None, container: Optional[Container] = None) -> int:
    """The entry point of the command line.

    Args:
        argv (Optional[Sequence[str]]): Arguments, `sys.argv` by default.
        container (Optional[Container]): Container to resolve services from.

    Returns:
        int: The exit code.
    """

    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or config.LOG_LEVEL)
    runner = Runner(container or Container(), args)

    try:
        getattr(runner, args.command.replace("-", "_"))()
    except NotConverged as error:
        if error.best_so_far is not None:
            logger.error("best estimate so far: %s", error.best_so_far.params)
        sys.stderr.write(json.dumps(error.to_dict()) + "\n")
        return error.exit_code
    except EmitterKitError as error:
        logger.error("%s: %s", error.code, error.message)
        sys.stderr.write(json.dumps(error.to_dict()) + "\n")
        return error.exit_code
    except ValidationError as error:
        logger.error("invalid input: %s", error)
        sys.stderr.write(json.dumps({"code": DomainValidationError.code, "detail": str(error)}) + "\n")
        return DomainValidationError.exit_code

    return 0
