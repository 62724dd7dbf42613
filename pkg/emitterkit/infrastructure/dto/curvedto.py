"""A module containing DTO models for thin-film curves."""

from typing import Any

from pydantic import BaseModel, ConfigDict

from emitterkit.config import config
from emitterkit.core.domain.thinfilm import OplCurve

CURVE_COLUMNS = ["thickness_nm", "opl_nm"]


class OplCurveDTO(BaseModel):
    """A model representing DTO for a serialized OPL curve (nanometers)."""
    schema_version: int
    stack_id: str
    wavelength_nm: float
    injectivity_limit_nm: float
    thickness_nm: list[float]
    opl_nm: list[float]

    model_config = ConfigDict(extra="ignore")

    @classmethod
    def from_curve(cls, curve: OplCurve) -> "OplCurveDTO":
        """A method for preparing DTO instance based on a curve.

        Args:
            curve (OplCurve): The curve.

        Returns:
            OplCurveDTO: The final DTO instance.
        """

        return cls(
            schema_version=config.SCHEMA_VERSION,
            stack_id=curve.stack_id,
            wavelength_nm=curve.wavelength * 1e9,
            injectivity_limit_nm=curve.injectivity_limit * 1e9,
            thickness_nm=[t * 1e9 for t in curve.thickness_grid],
            opl_nm=[v * 1e9 for v in curve.opl_values],
        )

    @staticmethod
    def rows(curve: OplCurve) -> list[dict[str, Any]]:
        """A method rendering `thickness_nm,opl_nm` rows.

        Args:
            curve (OplCurve): The curve.

        Returns:
            list[dict[str, Any]]: One row per grid point.
        """

        return [
            {"thickness_nm": t * 1e9, "opl_nm": v * 1e9}
            for t, v in zip(curve.thickness_grid, curve.opl_values)
        ]
