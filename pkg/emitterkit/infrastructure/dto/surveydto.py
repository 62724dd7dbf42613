"""A module containing DTO models for survey tables."""

import math
from datetime import datetime
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict

from emitterkit.core.domain.survey import EmitterRecord, Fabrication, FlakeGeometry

RECORD_COLUMNS = [
    "flake_id",
    "defect_id",
    "zpl_center_nm",
    "zpl_fwhm_nm",
    "lifetime_ns",
    "g2_zero",
    "alpha",
    "zpl_fraction",
    "brightness_cps",
    "single_emitter",
    "measured_at",
    "plasma_power_w",
    "plasma_time_s",
    "anneal_temp_k",
    "edge_length_um",
    "thickness_nm",
]


def _clean(value: Any) -> Any:
    if value is None:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, str) and not value.strip():
        return None
    return value


def _scaled(value: Any, factor: float) -> Optional[float]:
    value = _clean(value)
    return None if value is None else float(value) * factor


class EmitterRecordDTO(BaseModel):
    """A model representing DTO for one survey table row (lab units)."""
    flake_id: str
    defect_id: Optional[str] = None
    zpl_center_nm: Optional[float] = None
    zpl_fwhm_nm: Optional[float] = None
    lifetime_ns: Optional[float] = None
    g2_zero: Optional[float] = None
    alpha: Optional[float] = None
    zpl_fraction: Optional[float] = None
    brightness_cps: Optional[float] = None
    single_emitter: bool = True
    measured_at: Optional[datetime] = None
    plasma_power_w: Optional[float] = None
    plasma_time_s: Optional[float] = None
    anneal_temp_k: Optional[float] = None
    edge_length_um: Optional[float] = None
    thickness_nm: Optional[float] = None

    model_config = ConfigDict(extra="ignore")

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "EmitterRecordDTO":
        """A method for preparing DTO instance based on a table row.

        Args:
            record (dict[str, Any]): The row.

        Returns:
            EmitterRecordDTO: The final DTO instance.
        """

        row = {key: _clean(value) for key, value in record.items()}
        if row.get("defect_id") is not None:
            row["defect_id"] = str(row["defect_id"])
        row["flake_id"] = str(row.get("flake_id"))
        if row.get("single_emitter") is None:
            row.pop("single_emitter", None)

        return cls(**row)

    @classmethod
    def from_domain(cls, record: EmitterRecord) -> "EmitterRecordDTO":
        """A method for preparing DTO instance based on a domain record.

        Args:
            record (EmitterRecord): The record.

        Returns:
            EmitterRecordDTO: The final DTO instance.
        """

        return cls(
            flake_id=record.flake_id,
            defect_id=record.defect_id,
            zpl_center_nm=_scaled(record.zpl_center, 1e9),
            zpl_fwhm_nm=_scaled(record.zpl_fwhm, 1e9),
            lifetime_ns=_scaled(record.lifetime, 1e9),
            g2_zero=record.g2_zero,
            alpha=record.alpha,
            zpl_fraction=record.zpl_fraction,
            brightness_cps=record.brightness,
            single_emitter=record.single_emitter,
            measured_at=record.measured_at,
            plasma_power_w=record.fabrication.plasma_power,
            plasma_time_s=record.fabrication.plasma_time,
            anneal_temp_k=record.fabrication.anneal_temp,
            edge_length_um=_scaled(record.flake.edge_length, 1e6),
            thickness_nm=_scaled(record.flake.thickness, 1e9),
        )

    def to_domain(self) -> EmitterRecord:
        """A method converting the row into SI units.

        Returns:
            EmitterRecord: The domain record.
        """

        return EmitterRecord(
            flake_id=self.flake_id,
            defect_id=self.defect_id,
            zpl_center=_scaled(self.zpl_center_nm, 1e-9),
            zpl_fwhm=_scaled(self.zpl_fwhm_nm, 1e-9),
            lifetime=_scaled(self.lifetime_ns, 1e-9),
            g2_zero=self.g2_zero,
            alpha=self.alpha,
            zpl_fraction=self.zpl_fraction,
            brightness=self.brightness_cps,
            single_emitter=self.single_emitter,
            measured_at=self.measured_at,
            fabrication=Fabrication(
                plasma_power=self.plasma_power_w,
                plasma_time=self.plasma_time_s,
                anneal_temp=self.anneal_temp_k,
            ),
            flake=FlakeGeometry(
                edge_length=_scaled(self.edge_length_um, 1e-6),
                thickness=_scaled(self.thickness_nm, 1e-9),
            ),
        )
