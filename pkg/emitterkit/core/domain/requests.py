"""Module containing request models of the HTTP surface.

Lengths arrive in nanometers and delays in picoseconds, as in the CSV
tables; the routers convert them to SI before calling the services.
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from emitterkit.core.domain.photons import EmitterRates
from emitterkit.core.domain.survey import EmitterRecord
from emitterkit.core.domain.thinfilm import LayerStack


class G2RatesIn(BaseModel):
    """Model representing a g² prediction request."""
    rates: EmitterRates
    excitation_rate: Optional[float] = Field(default=None, gt=0)
    signal_fraction: float = Field(default=1.0, ge=0, le=1)


class SaturationRatesIn(BaseModel):
    """Model representing a saturation prediction request."""
    rates: EmitterRates
    excitation_per_watt: float = Field(gt=0)


class ProductIn(BaseModel):
    """Model representing a lifetime-bandwidth request."""
    center_nm: float = Field(gt=0)
    fwhm_nm: float = Field(gt=0)
    lifetime_ns: float = Field(gt=0)


class FitIn(BaseModel):
    """Model representing the bootstrap settings shared by every fit."""
    n_samples: Optional[int] = Field(default=None, ge=0)
    seed: int = 0


class G2FitIn(FitIn):
    """Model representing a g² histogram to fit."""
    bin_edges_ps: list[float]
    raw_counts: list[int]
    normalized: list[float]
    normalization_factor: float = Field(gt=0)
    binning: Literal["uniform", "log"] = "uniform"

    @model_validator(mode="after")
    def _check_bins(self) -> "G2FitIn":
        if len(self.bin_edges_ps) != len(self.normalized) + 1 or len(self.raw_counts) != len(self.normalized):
            raise ValueError("bin_edges_ps needs one entry more than raw_counts and normalized")
        return self


class LifetimeFitIn(FitIn):
    """Model representing a TRPL histogram to fit."""
    bin_edges_ps: list[float]
    counts: list[int]
    period_ps: Optional[float] = Field(default=None, gt=0)
    jitter_sigma_ps: float = Field(default=0.0, ge=0)
    fit_window_ps: Optional[tuple[float, float]] = None

    @model_validator(mode="after")
    def _check_bins(self) -> "LifetimeFitIn":
        if len(self.bin_edges_ps) != len(self.counts) + 1:
            raise ValueError("bin_edges_ps needs one entry more than counts")
        return self


class SaturationFitIn(FitIn):
    """Model representing a power series to fit."""
    power_w: list[float]
    intensity_cps: list[float]


class SpectrumFitIn(FitIn):
    """Model representing a spectrum to decompose into peaks."""
    wavelength_nm: list[float]
    counts: list[float]
    n_peaks: int = Field(default=1, ge=1)
    fit_gauss_fraction: bool = False


class CurveIn(BaseModel):
    """Model representing an OPL curve request.

    The default stack is SiO₂ on Si at the probe wavelength.
    """
    stack: Optional[LayerStack] = None
    flake_n: float = Field(default=1.849, gt=0)
    flake_k: float = Field(default=0.0, ge=0)
    start_nm: float = Field(default=0.0, ge=0)
    stop_nm: float = Field(default=60.0, gt=0)
    wavelength_nm: Optional[float] = Field(default=None, gt=0)
    step_nm: Optional[float] = Field(default=None, gt=0)


class InvertIn(CurveIn):
    """Model representing a measured OPL to convert into a thickness."""
    opl_nm: float


class CalibrateIn(FitIn):
    """Model representing (AFM thickness, OPL) calibration pairs."""
    points_nm: list[tuple[float, float]] = Field(min_length=1)
    stack: Optional[LayerStack] = None
    wavelength_nm: Optional[float] = Field(default=None, gt=0)


class SurveyIn(BaseModel):
    """Model representing survey records to summarize."""
    records: list[EmitterRecord] = Field(min_length=1)
    allow_ensembles: bool = False


class AnnealIn(BaseModel):
    """Model representing brightness samples keyed by anneal temperature."""
    groups: dict[float, list[float]] = Field(min_length=1)
