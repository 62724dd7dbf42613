"""A module containing survey statistics endpoints."""

from typing import Literal

from dependency_injector.wiring import Provide, inject
from fastapi import APIRouter, Depends, HTTPException

from emitterkit.container import Container
from emitterkit.core.domain.requests import AnnealIn, SurveyIn
from emitterkit.core.domain.survey import (
    AgingSummary,
    AnnealSummary,
    DensityTrend,
    LifetimeBandwidthTable,
    SurveyStats,
)
from emitterkit.infrastructure.services.isurvey import ISurveyService

router = APIRouter()


def _validate(request: SurveyIn, service: ISurveyService) -> None:
    for record in request.records:
        match service.validate_record(record, request.allow_ensembles):
            case "record-g2-ensemble":
                raise HTTPException(
                    status_code=422,
                    detail=f"Record {record.flake_id}/{record.defect_id} is an ensemble.",
                )
            case "record-zpl-fraction-invalid":
                raise HTTPException(status_code=422, detail="ZPL fraction must lie in [0, 1].")
            case "record-g2-invalid":
                raise HTTPException(status_code=422, detail="g2(0) must lie in [0, 1].")


@router.post("/stats", response_model=SurveyStats, status_code=200)
@inject
async def get_survey_stats(
    request: SurveyIn,
    service: ISurveyService = Depends(Provide[Container.survey_service]),
) -> dict:
    """An endpoint summarizing survey records.

    Args:
        request (SurveyIn): The records.
        service (ISurveyService, optional): The injected service dependency.

    Raises:
        HTTPException: 422 if a record fails validation.

    Returns:
        dict: Counts, ZPL histogram, property ranges and correlations.
    """

    _validate(request, service)

    return service.survey_stats(request.records).model_dump()


@router.post("/density-trend", response_model=DensityTrend, status_code=200)
@inject
async def get_density_trend(
    request: SurveyIn,
    parameter: Literal["plasma_power", "plasma_time"] = "plasma_power",
    service: ISurveyService = Depends(Provide[Container.survey_service]),
) -> dict:
    """An endpoint regressing the linear defect density on a plasma setting.

    Args:
        request (SurveyIn): The records.
        parameter (Literal["plasma_power", "plasma_time"]): The regressor.
        service (ISurveyService, optional): The injected service dependency.

    Returns:
        dict: Slope, intercept and the slope interval.
    """

    _validate(request, service)

    return service.density_trend(request.records, parameter).model_dump()


@router.post("/products", response_model=LifetimeBandwidthTable, status_code=200)
@inject
async def get_lifetime_bandwidth_table(
    request: SurveyIn,
    service: ISurveyService = Depends(Provide[Container.survey_service]),
) -> dict:
    """An endpoint tabulating lifetime-bandwidth products.

    Args:
        request (SurveyIn): The records.
        service (ISurveyService, optional): The injected service dependency.

    Returns:
        dict: One row per complete record with the minimum and mean.
    """

    _validate(request, service)

    return service.lifetime_bandwidth_table(request.records).model_dump()


@router.post("/aging", response_model=AgingSummary, status_code=200)
@inject
async def get_aging_summary(
    request: SurveyIn,
    service: ISurveyService = Depends(Provide[Container.survey_service]),
) -> dict:
    """An endpoint summarizing dated record series per defect.

    Args:
        request (SurveyIn): The records.
        service (ISurveyService, optional): The injected service dependency.

    Returns:
        dict: The aging entries.
    """

    _validate(request, service)

    return service.aging_summary(request.records).model_dump()


@router.post("/anneal", response_model=AnnealSummary, status_code=200)
@inject
async def get_anneal_summary(
    request: AnnealIn,
    service: ISurveyService = Depends(Provide[Container.survey_service]),
) -> dict:
    """An endpoint aggregating brightness per anneal temperature.

    Args:
        request (AnnealIn): Samples per temperature.
        service (ISurveyService, optional): The injected service dependency.

    Returns:
        dict: Mean ± standard deviation per group and the best band.
    """

    return service.anneal_brightness_summary(request.groups).model_dump()
