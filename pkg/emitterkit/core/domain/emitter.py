"""Module containing emitter model parameter records."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

# rounding slack on g²(0) = 1 − A + B
G2_ZERO_TOLERANCE = 1e-12


class ThreeLevelParams(BaseModel):
    """Model representing the three-level g² parameters.

    Times are in seconds, amplitudes dimensionless.
    """
    antibunch_amp: float = Field(ge=0)
    bunch_amp: float = Field(ge=0)
    excited_lifetime: float = Field(gt=0)
    shelving_lifetime: float = Field(gt=0)
    delay_offset: float = 0.0

    model_config = ConfigDict(frozen=True, extra="ignore")

    @model_validator(mode="after")
    def _check_regime(self) -> "ThreeLevelParams":
        if self.shelving_lifetime <= self.excited_lifetime:
            raise ValueError("shelving lifetime must exceed excited lifetime")
        if 1.0 - self.antibunch_amp + self.bunch_amp < -G2_ZERO_TOLERANCE:
            raise ValueError("g2(0) = 1 - A + B must be non-negative")
        return self

    @property
    def g2_zero(self) -> float:
        """float: g²(τ = μ) = 1 − A + B, rounding below zero clipped."""
        return max(1.0 - self.antibunch_amp + self.bunch_amp, 0.0)


class SaturationParams(BaseModel):
    """Model representing the saturation curve parameters."""
    sat_intensity: float = Field(gt=0)
    sat_power: float = Field(gt=0)
    dark_intensity: float = Field(default=0.0, ge=0)

    model_config = ConfigDict(frozen=True, extra="ignore")


class PowerLawParams(BaseModel):
    """Model representing a log-log power law I = exp(c)·P^α."""
    slope: float = Field(gt=0)
    log_prefactor: float = 0.0

    model_config = ConfigDict(frozen=True, extra="ignore")


class Peak(BaseModel):
    """Model representing a single pseudo-Voigt peak (SI units)."""
    center: float = Field(gt=0)
    fwhm: float = Field(gt=0)
    area: float = Field(ge=0)
    gauss_fraction: float = Field(default=0.0, ge=0, le=1)

    model_config = ConfigDict(frozen=True, extra="ignore")


class LineshapeParams(BaseModel):
    """Model representing a multi-peak spectrum with constant baseline."""
    peaks: tuple[Peak, ...]
    baseline: float = 0.0

    model_config = ConfigDict(frozen=True, extra="ignore")

    def check_window(self, lower: float, upper: float) -> None:
        """A method checking that every center lies in the spectral window.

        Args:
            lower (float): Shortest recorded wavelength.
            upper (float): Longest recorded wavelength.

        Raises:
            ValueError: When a center falls outside the window.
        """

        for peak in self.peaks:
            if not lower <= peak.center <= upper:
                raise ValueError(f"peak center {peak.center} outside spectrum")


class ExcitationConstants(BaseModel):
    """Model representing the excitation laser set-up."""
    wavelength: float = Field(default=522e-9, gt=0)
    pulse_length: float = Field(default=300e-15, gt=0)
    rep_rate: float = Field(default=20.8e6, gt=0)
    spot_diameter: float = Field(default=0.67e-6, gt=0)

    model_config = ConfigDict(frozen=True, extra="ignore")

    @model_validator(mode="after")
    def _check_duty(self) -> "ExcitationConstants":
        if self.pulse_length * self.rep_rate >= 1:
            raise ValueError("pulse_length x rep_rate must stay below 1")
        return self
