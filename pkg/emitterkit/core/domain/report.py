"""Module containing characterization report models."""

from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from emitterkit.core.domain.fit import FitResult


class ReportRequest(BaseModel):
    """Model representing the inputs of a single-emitter characterization.

    Any subset of the four measurements may be given, but not none.
    """
    spectrum_path: Optional[Path] = None
    hbt_path: Optional[Path] = None
    trpl_path: Optional[Path] = None
    saturation_path: Optional[Path] = None
    n_peaks: int = Field(default=1, ge=1)
    g2_bin_width: int = Field(default=100, ge=1)
    g2_max_lag: int = Field(default=50_000, ge=1)
    trpl_bin_width: int = Field(default=16, ge=1)
    n_samples: Optional[int] = Field(default=None, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _check_inputs(self) -> "ReportRequest":
        if not any((self.spectrum_path, self.hbt_path, self.trpl_path, self.saturation_path)):
            raise ValueError("report needs at least one measurement")
        return self


class CharacterizationReport(BaseModel):
    """Model representing fitted results and the tables written for them."""
    fits: dict[str, FitResult] = Field(default_factory=dict)
    tables: dict[str, str] = Field(default_factory=dict)
    summary: dict[str, float] = Field(default_factory=dict)
    classification: Optional[str] = None
    background_lines: dict[str, str] = Field(default_factory=dict)
