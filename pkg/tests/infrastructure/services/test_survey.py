from datetime import datetime

import numpy as np
import pytest

from emitterkit.core.domain.emitter import Peak
from emitterkit.core.domain.fit import FitResult
from emitterkit.core.domain.survey import EmitterMeasurement, EmitterRecord, Fabrication, FlakeGeometry
from emitterkit.core.errors import (
    DegenerateDesign,
    DegenerateGeometry,
    DomainValidationError,
    EnsembleRecord,
    SmallSampleWarning,
)
from emitterkit.infrastructure.services.survey import window_fraction
from tests.factories import make_decay, make_g2_histogram, make_spectrum


def record(flake_id: str, defect_id: str | None = "1", **fields) -> EmitterRecord:
    return EmitterRecord(flake_id=flake_id, defect_id=defect_id, **fields)


def peaks_fit(*peaks: tuple[float, float, float]) -> FitResult:
    params = {"baseline": 0.0}
    for i, (center, fwhm, area) in enumerate(peaks):
        params.update({f"peak{i}_center": center, f"peak{i}_fwhm": fwhm, f"peak{i}_area": area})
    return FitResult(model_id=f"pseudo_voigt_{len(peaks)}", params=params, residual_norm=0.0, n_points=801)


class TestDensity:
    def test_quotient(self, survey_service):
        assert survey_service.defect_density(4, 20e-6) == pytest.approx(2e5)
        assert survey_service.defect_density(0, 20e-6) == 0.0

    def test_zero_edge_length(self, survey_service):
        with pytest.raises(DegenerateGeometry):
            survey_service.defect_density(3, 0.0)

    def test_trend_recovers_the_generating_slope(self, survey_service):
        records = []
        for power in range(10, 110, 10):
            for copy in range(3):
                flake_id = f"P{power}-{copy}"
                for defect in range(power // 10):
                    records.append(record(
                        flake_id,
                        str(defect),
                        fabrication=Fabrication(plasma_power=float(power)),
                        flake=FlakeGeometry(edge_length=10e-6),
                    ))

        trend = survey_service.density_trend(records)

        assert trend.slope == pytest.approx(1e4, rel=0.05)
        assert trend.n_flakes == 30
        assert not trend.compatible_with_zero

    def test_trend_needs_two_settings(self, survey_service):
        records = [
            record(f"F{i}", fabrication=Fabrication(plasma_power=50.0), flake=FlakeGeometry(edge_length=1e-5))
            for i in range(3)
        ]
        with pytest.raises(DegenerateDesign):
            survey_service.density_trend(records)


class TestStats:
    @pytest.fixture
    def records(self) -> list[EmitterRecord]:
        return [
            record("F1", "1", zpl_center=560e-9, zpl_fwhm=3e-9, lifetime=2e-9),
            record("F1", "2", zpl_center=575e-9, zpl_fwhm=2e-9, lifetime=3e-9),
            record("F2", "1", zpl_center=600e-9, zpl_fwhm=6e-9, lifetime=1e-9),
            record("F3", None),
        ]

    def test_counts(self, survey_service, records):
        stats = survey_service.survey_stats(records)

        assert stats.n_flakes == 3
        assert stats.n_defects == 3
        assert stats.mean_defects_per_hosting_flake == pytest.approx(1.5)
        assert stats.properties["zpl_center"].mean == pytest.approx(578.333e-9, rel=1e-5)

    def test_zpl_bands(self, survey_service, records):
        bands = {band.label: band.count for band in survey_service.survey_stats(records).zpl_histogram}

        assert bands["550-570 nm"] == 1
        assert bands["570-590 nm"] == 1
        assert bands["590-610 nm"] == 1
        assert sum(bands.values()) == 3

    def test_missing_center_lands_in_unknown(self, survey_service):
        stats = survey_service.survey_stats([record("F1")])
        assert {band.label: band.count for band in stats.zpl_histogram}["unknown"] == 1

    def test_permutation_invariant(self, survey_service, records):
        forward = survey_service.survey_stats(records)
        backward = survey_service.survey_stats(records[::-1])
        assert forward.model_dump() == backward.model_dump()

    def test_single_record_has_no_correlation(self, survey_service):
        stats = survey_service.survey_stats([record("F1", zpl_fwhm=3e-9, lifetime=2e-9)])
        assert stats.correlation["zpl_fwhm"]["lifetime"] is None

    def test_narrow_lines_live_longer(self, survey_service):
        records = [
            record(f"F{i}", zpl_fwhm=10e-9 / tau, lifetime=tau * 1e-9)
            for i, tau in enumerate((1.0, 2.0, 3.0, 4.0, 5.0))
        ]
        correlation = survey_service.survey_stats(records).correlation

        assert correlation["zpl_fwhm"]["lifetime"] < -0.8
        assert correlation["lifetime"]["lifetime"] == pytest.approx(1.0)

    def test_empty_survey(self, survey_service):
        with pytest.raises(DomainValidationError):
            survey_service.survey_stats([])


class TestZplFraction:
    def test_window_fraction(self):
        assert window_fraction(0.0, 2.0, 0.0, (-1.0, 1.0)) == pytest.approx(0.5)
        assert window_fraction(0.0, 2.0, 1.0, (-1.0, 1.0)) == pytest.approx(0.7610, abs=1e-4)

    def test_single_peak_takes_everything(self, survey_service):
        s = make_spectrum([Peak(center=600e-9, fwhm=2e-9, area=1e-6)], baseline=0.0)
        assert survey_service.zpl_fraction(s, peaks_fit((600e-9, 2e-9, 1e-6))) == pytest.approx(1.0)

    def test_area_ratio(self, survey_service):
        s = make_spectrum([], baseline=1.0)
        fit = peaks_fit((580e-9, 2e-9, 4e-6), (620e-9, 2e-9, 1e-6))

        assert survey_service.zpl_fraction(s, fit) == pytest.approx(0.8, abs=1e-3)
        assert survey_service.zpl_fraction(s, fit, zpl_peak=1) == pytest.approx(0.2, abs=1e-3)

    def test_peak_index_out_of_range(self, survey_service):
        with pytest.raises(DomainValidationError):
            survey_service.zpl_fraction(make_spectrum([]), peaks_fit((600e-9, 2e-9, 1e-6)), zpl_peak=3)


class TestProducts:
    def test_table(self, survey_service):
        table = survey_service.lifetime_bandwidth_table([
            record("F1", "1", zpl_center=553.23e-9, zpl_fwhm=2.82e-9, lifetime=1.123e-9),
            record("F1", "2", zpl_center=566.04e-9, zpl_fwhm=1.31e-9, lifetime=1.133e-9),
            record("F1", "3", zpl_center=566.04e-9, zpl_fwhm=1.31e-9),
            record("F2", None),
        ])

        assert [row.product for row in table.rows] == pytest.approx([3102, 1389], rel=0.01)
        assert table.skipped == ["F1/3"]
        assert table.minimum == table.rows[1].product
        assert table.mean == pytest.approx(np.mean([row.product for row in table.rows]))


class TestAnneal:
    def test_band_around_the_brightest_group(self, survey_service):
        summary = survey_service.anneal_brightness_summary({
            1023.15: [5.0, 6.0, 7.0],
            1073.15: [9.0, 10.0, 11.0],
            1123.15: [9.5, 10.5, 11.5],
            1173.15: [4.0, 5.0, 6.0],
        })

        assert summary.best_temperature == 1123.15
        assert (summary.band_lower, summary.band_upper) == (1073.15, 1123.15)
        assert not summary.tie

    def test_ties_break_towards_the_lowest_temperature(self, survey_service):
        summary = survey_service.anneal_brightness_summary({1173.0: [5.0, 5.0], 1073.0: [5.0, 5.0]})

        assert summary.tie
        assert summary.best_temperature == 1073.0
        assert summary.tied_temperatures == [1073.0, 1173.0]

    def test_single_sample_warns(self, survey_service):
        with pytest.warns(SmallSampleWarning):
            summary = survey_service.anneal_brightness_summary({1073.0: [4.0], 1123.0: [3.0, 5.0]})

        assert summary.groups[0].std == 0.0
        assert summary.groups[0].small_sample

    def test_empty_group(self, survey_service):
        with pytest.raises(DomainValidationError):
            survey_service.anneal_brightness_summary({1073.0: []})


def test_aging_follows_repeated_defects(survey_service):
    summary = survey_service.aging_summary([
        record("F1", "1", zpl_center=567.4e-9, zpl_fwhm=6.61e-9, measured_at=datetime(2024, 9, 1)),
        record("F1", "1", zpl_center=567.6e-9, zpl_fwhm=4.38e-9, measured_at=datetime(2024, 1, 1)),
        record("F1", "2", zpl_fwhm=3e-9, measured_at=datetime(2024, 1, 1)),
    ])

    (entry,) = summary.entries
    assert entry.n_points == 2
    assert (entry.first_fwhm, entry.last_fwhm) == (4.38e-9, 6.61e-9)
    assert entry.zpl_span == pytest.approx(0.2e-9)


class TestValidation:
    @pytest.mark.parametrize("fields, allow, expected", [
        ({"g2_zero": 0.2}, False, None),
        ({"g2_zero": 0.6}, False, "record-g2-ensemble"),
        ({"g2_zero": 0.6}, True, None),
        ({"g2_zero": 1.2}, True, "record-g2-invalid"),
        ({"g2_zero": 0.8, "single_emitter": False}, False, None),
        ({"zpl_fraction": 1.2}, False, "record-zpl-fraction-invalid"),
    ])
    def test_record_codes(self, survey_service, fields, allow, expected):
        assert survey_service.validate_record(record("F1", **fields), allow_ensembles=allow) == expected

    def test_ingest_rejects_ensembles(self, survey_service, tmp_path):
        path = tmp_path / "survey.csv"
        path.write_text("flake_id,defect_id,g2_zero\nF1,1,0.2\nF1,2,0.7\n")

        with pytest.raises(EnsembleRecord):
            survey_service.ingest_records(path)
        assert len(survey_service.ingest_records(path, allow_ensembles=True)) == 2


class TestComparison:
    @staticmethod
    def measurement(center: float, area: float, lifetime: float, g2_params) -> EmitterMeasurement:
        return EmitterMeasurement(
            spectrum=make_spectrum([Peak(center=center, fwhm=2e-9, area=area)]),
            decay=make_decay(lifetime),
            g2=make_g2_histogram(g2_params),
        )

    def test_identical_inputs_change_nothing(self, survey_service, g2_params):
        data = self.measurement(567.61e-9, 1e-6, 468e-12, g2_params)
        report = survey_service.compare_emitters(data, data, n_samples=0)

        assert report.zpl_shift.change == 0.0
        assert report.brightness_ratio.change == 1.0
        assert report.lifetime_change.change == 0.0
        assert report.g2_zero_change.change == 0.0

    def test_transfer_shift_and_dimming(self, survey_service, g2_params):
        before = self.measurement(567.61e-9, 1e-6, 468e-12, g2_params)
        after = self.measurement(567.39e-9, 0.5347e-6, 375e-12, g2_params)

        report = survey_service.compare_emitters(before, after, n_samples=0)

        assert report.zpl_shift.change == pytest.approx(-0.22e-9, abs=1e-12)
        assert report.brightness_ratio.change == pytest.approx(0.5347, rel=1e-3)
        assert report.lifetime_change.change == pytest.approx(-93e-12, abs=2e-12)
        lower, upper = report.zpl_shift.ci95
        assert lower <= report.zpl_shift.change <= upper
