"""Module containing fit-related domain models."""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from emitterkit.core.domain.arrays import FloatArray


class NoiseModel(BaseModel):
    """Model representing how bootstrap datasets are synthesized."""
    kind: Literal["poisson", "residual", "gaussian"] = "poisson"
    sigma: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_sigma(self) -> "NoiseModel":
        if self.kind == "gaussian" and self.sigma is None:
            raise ValueError("gaussian noise requires sigma")
        return self


class CurveData(BaseModel):
    """Model representing abscissa, observations and their standard errors.

    `count_scale` maps observations to Poisson counts (counts = y·scale),
    None when the data are not counts.
    """
    x: FloatArray
    y: FloatArray
    sigma: Optional[FloatArray] = None
    count_scale: Optional[FloatArray] = None

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_shapes(self) -> "CurveData":
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)

        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have equal shapes")
        for name in ("sigma", "count_scale"):
            value = getattr(self, name)
            if value is not None:
                value = np.broadcast_to(np.asarray(value, dtype=np.float64), self.y.shape)
                setattr(self, name, value)
        return self

    def __len__(self) -> int:
        return int(self.y.size)

    def with_observations(self, y: np.ndarray) -> "CurveData":
        """A method returning the same design with other observations.

        Args:
            y (np.ndarray): Replacement observations.

        Returns:
            CurveData: The new data set.
        """

        return CurveData(x=self.x, y=y, sigma=self.sigma, count_scale=self.count_scale)


class FitResult(BaseModel):
    """Model representing parameter estimates and their uncertainties."""
    model_id: str
    params: dict[str, float]
    derived: dict[str, float] = Field(default_factory=dict)
    ci95: dict[str, tuple[float, float]] = Field(default_factory=dict)
    cov_ci95: dict[str, tuple[float, float]] = Field(default_factory=dict)
    covariance: list[list[float]] = Field(default_factory=list)
    fitted: list[str] = Field(default_factory=list)
    residual_norm: float = Field(ge=0)
    n_points: int = Field(ge=0)
    converged: bool = True
    n_mc_samples: int = 0
    classification: Optional[str] = None
    warnings: list[str] = Field(default_factory=list)

    model_config = ConfigDict(extra="ignore")

    @model_validator(mode="after")
    def _check_intervals(self) -> "FitResult":
        if not self.converged:
            return self
        for name, (lower, upper) in self.ci95.items():
            estimate = self.value(name) if name in self.params or name in self.derived else None
            if estimate is not None and not lower <= estimate <= upper:
                raise ValueError(f"ci95 of {name} does not bracket the estimate")
        return self

    def value(self, name: str) -> float:
        """A method looking up a fitted or derived quantity.

        Args:
            name (str): Parameter name.

        Returns:
            float: The estimate.
        """

        if name in self.params:
            return self.params[name]
        return self.derived[name]

    def interval(self, name: str) -> tuple[float, float]:
        """A method returning the Monte Carlo interval, falling back to covariance.

        Args:
            name (str): Parameter name.

        Returns:
            tuple[float, float]: Lower and upper bound.
        """

        if name in self.ci95:
            return self.ci95[name]
        estimate = self.value(name)
        return self.cov_ci95.get(name, (estimate, estimate))

    def half_width(self, name: str) -> float:
        """A method returning half the 95% interval width.

        Args:
            name (str): Parameter name.

        Returns:
            float: Half width.
        """

        lower, upper = self.interval(name)
        return 0.5 * (upper - lower)


class Spectrum(BaseModel):
    """Model representing a recorded emission spectrum (wavelength in meters)."""
    wavelength: FloatArray
    counts: FloatArray
    integration_time: Optional[float] = Field(default=None, gt=0)
    label: str = ""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="ignore")

    @model_validator(mode="after")
    def _check_axes(self) -> "Spectrum":
        self.wavelength = np.asarray(self.wavelength, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.float64)

        if self.wavelength.shape != self.counts.shape or self.wavelength.ndim != 1:
            raise ValueError("wavelength and counts must be equal-length vectors")
        if np.any(np.diff(self.wavelength) <= 0):
            raise ValueError("wavelengths must be strictly ascending")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        return self

    @property
    def window(self) -> tuple[float, float]:
        """tuple[float, float]: Recorded wavelength range."""
        return float(self.wavelength[0]), float(self.wavelength[-1])
