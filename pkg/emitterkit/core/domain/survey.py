"""Module containing survey, comparison and aggregation models."""

from datetime import datetime
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from emitterkit.core.domain.fit import Spectrum
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram


class Fabrication(BaseModel):
    """Model representing the defect-generation recipe of a flake."""
    plasma_power: Optional[float] = Field(default=None, ge=0)
    plasma_time: Optional[float] = Field(default=None, ge=0)
    anneal_temp: Optional[float] = Field(default=None, gt=0)


class FlakeGeometry(BaseModel):
    """Model representing flake geometry; edge length is the perimeter."""
    edge_length: Optional[float] = Field(default=None, ge=0)
    thickness: Optional[float] = Field(default=None, ge=0)


class EmitterRecord(BaseModel):
    """Model representing one surveyed emitter (SI units).

    A record with `defect_id` None stands for a flake hosting no defect.
    """
    flake_id: str
    defect_id: Optional[str] = None
    zpl_center: Optional[float] = Field(default=None, gt=0)
    zpl_fwhm: Optional[float] = Field(default=None, ge=0)
    lifetime: Optional[float] = Field(default=None, gt=0)
    g2_zero: Optional[float] = Field(default=None, ge=0)
    alpha: Optional[float] = None
    zpl_fraction: Optional[float] = None
    brightness: Optional[float] = Field(default=None, ge=0)
    single_emitter: bool = True
    measured_at: Optional[datetime] = None
    fabrication: Fabrication = Field(default_factory=Fabrication)
    flake: FlakeGeometry = Field(default_factory=FlakeGeometry)

    model_config = ConfigDict(extra="ignore")

    @property
    def hosts_defect(self) -> bool:
        """bool: False for rows marking an empty flake."""
        return self.defect_id is not None


class ZplBand(BaseModel):
    """Model representing one band of the ZPL histogram."""
    label: str
    lower: Optional[float] = None
    upper: Optional[float] = None
    count: int = 0


class PropertySummary(BaseModel):
    """Model representing min/max/mean of one record property."""
    n: int
    minimum: float
    maximum: float
    mean: float


class SurveyStats(BaseModel):
    """Model representing survey summary statistics."""
    n_flakes: int
    n_defects: int
    mean_defects_per_hosting_flake: Optional[float] = None
    zpl_histogram: list[ZplBand] = Field(default_factory=list)
    properties: dict[str, PropertySummary] = Field(default_factory=dict)
    correlation: dict[str, dict[str, Optional[float]]] = Field(default_factory=dict)


class DensityTrend(BaseModel):
    """Model representing a linear defect-density regression."""
    parameter: str
    slope: float
    intercept: float
    slope_ci95: tuple[float, float]
    compatible_with_zero: bool
    n_flakes: int


class ReportedChange(BaseModel):
    """Model representing a before/after change with its 95% interval."""
    before: float
    after: float
    change: float
    ci95: tuple[float, float]


class TransferReport(BaseModel):
    """Model representing the before/after comparison of one emitter."""
    zpl_shift: ReportedChange
    brightness_ratio: ReportedChange
    fwhm_change: ReportedChange
    lifetime_change: ReportedChange
    g2_zero_change: ReportedChange
    zpl_fraction_change: ReportedChange


class AnnealGroup(BaseModel):
    """Model representing brightness statistics at one anneal temperature."""
    temperature: float
    mean: float
    std: float
    n: int
    small_sample: bool = False


class AnnealSummary(BaseModel):
    """Model representing the anneal brightness aggregation.

    The band is the contiguous run of temperatures around the best one
    whose mean stays within one standard deviation of the best mean.
    """
    groups: list[AnnealGroup]
    best_temperature: float
    band_lower: float
    band_upper: float
    tied_temperatures: list[float] = Field(default_factory=list)

    @property
    def tie(self) -> bool:
        """bool: True when several groups share the maximal mean."""
        return len(self.tied_temperatures) > 1


class ProductRow(BaseModel):
    """Model representing one lifetime-bandwidth table row."""
    flake_id: str
    defect_id: Optional[str] = None
    bandwidth: float
    lifetime: float
    product: float


class LifetimeBandwidthTable(BaseModel):
    """Model representing lifetime-bandwidth products of a cohort."""
    rows: list[ProductRow] = Field(default_factory=list)
    skipped: list[str] = Field(default_factory=list)
    minimum: Optional[float] = None
    mean: Optional[float] = None


class AgingEntry(BaseModel):
    """Model representing the chronological record series of one defect."""
    flake_id: str
    defect_id: str
    n_points: int
    first_measured: Optional[datetime] = None
    last_measured: Optional[datetime] = None
    zpl_span: Optional[float] = None
    first_fwhm: Optional[float] = None
    last_fwhm: Optional[float] = None


class AgingSummary(BaseModel):
    """Model representing aging entries of every defect with a series."""
    entries: list[AgingEntry] = Field(default_factory=list)


class EmitterMeasurement(BaseModel):
    """Model representing the spectrum, TRPL and g² data of one emitter."""
    spectrum: Spectrum
    decay: DecayHistogram
    g2: CorrelationHistogram
    label: str = ""
