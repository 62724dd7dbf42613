"""A module containing DTO models for fit results."""

from typing import Optional

from pydantic import BaseModel, ConfigDict

from emitterkit.config import config
from emitterkit.core.domain.fit import FitResult


class FitResultDTO(BaseModel):
    """A model representing DTO for serialized fit results."""
    schema_version: int
    model_id: str
    params: dict[str, float]
    ci95: dict[str, tuple[float, float]]
    converged: bool
    n_mc_samples: int
    derived: dict[str, float] = {}
    cov_ci95: dict[str, tuple[float, float]] = {}
    residual_norm: float = 0.0
    n_points: int = 0
    classification: Optional[str] = None
    warnings: list[str] = []

    model_config = ConfigDict(
        from_attributes=True,
        extra="ignore",
    )

    @classmethod
    def from_result(cls, result: FitResult) -> "FitResultDTO":
        """A method for preparing DTO instance based on a fit result.

        Args:
            result (FitResult): The fit.

        Returns:
            FitResultDTO: The final DTO instance.
        """

        return cls(
            schema_version=config.SCHEMA_VERSION,
            model_id=result.model_id,
            params=result.params,
            ci95=result.ci95,
            converged=result.converged,
            n_mc_samples=result.n_mc_samples,
            derived=result.derived,
            cov_ci95=result.cov_ci95,
            residual_norm=result.residual_norm,
            n_points=result.n_points,
            classification=result.classification,
            warnings=result.warnings,
        )

    def to_result(self) -> FitResult:
        """A method restoring the domain fit result.

        Returns:
            FitResult: The fit without covariance matrix.
        """

        return FitResult(**self.model_dump(exclude={"schema_version"}))
