"""A module containing emitter-model calculator endpoints."""

from dependency_injector.wiring import Provide, inject
from fastapi import APIRouter, Depends

from emitterkit.config import AppConfig
from emitterkit.container import Container
from emitterkit.core.domain.emitter import SaturationParams, ThreeLevelParams
from emitterkit.core.domain.requests import G2RatesIn, ProductIn, SaturationRatesIn
from emitterkit.core.physics.photophysics import (
    g2_from_rates,
    lifetime_bandwidth_product,
    linewidth_to_bandwidth,
    saturation_from_rates,
    transform_limit_ratio,
)

router = APIRouter()


@router.post("/g2", response_model=ThreeLevelParams, status_code=200)
async def predict_g2(request: G2RatesIn) -> dict:
    """An endpoint deriving g² parameters from transition rates.

    Args:
        request (G2RatesIn): The rates and signal fraction.

    Returns:
        dict: A, B, t1 and t2 in seconds.
    """

    params = g2_from_rates(request.rates, request.excitation_rate, request.signal_fraction)

    return params.model_dump()


@router.post("/saturation", response_model=SaturationParams, status_code=200)
async def predict_saturation(request: SaturationRatesIn) -> dict:
    """An endpoint predicting the saturation curve of a rate model.

    Args:
        request (SaturationRatesIn): The rates and excitation per watt.

    Returns:
        dict: I_sat, P_sat and I_d.
    """

    return saturation_from_rates(request.rates, request.excitation_per_watt).model_dump()


@router.post("/product", status_code=200)
@inject
async def get_lifetime_bandwidth_product(
    request: ProductIn,
    settings: AppConfig = Depends(Provide[Container.config]),
) -> dict:
    """An endpoint computing the lifetime-bandwidth product of a line.

    Args:
        request (ProductIn): Line center, FWHM and lifetime.
        settings (AppConfig, optional): The injected configuration.

    Returns:
        dict: Bandwidth in hertz, the product and its distance from the
            Fourier limit.
    """

    center, fwhm = request.center_nm * 1e-9, request.fwhm_nm * 1e-9
    product = lifetime_bandwidth_product(center, fwhm, request.lifetime_ns * 1e-9)

    return {
        "schema_version": settings.SCHEMA_VERSION,
        "bandwidth_hz": linewidth_to_bandwidth(center, fwhm),
        "product": product,
        "transform_limit_ratio": transform_limit_ratio(product),
    }
