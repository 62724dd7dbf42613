"""A module containing curve-fitting endpoints."""

import numpy as np
from dependency_injector.wiring import Provide, inject
from fastapi import APIRouter, Depends

from emitterkit.container import Container
from emitterkit.core.domain.fit import Spectrum
from emitterkit.core.domain.histogram import CorrelationHistogram, DecayHistogram
from emitterkit.core.domain.requests import G2FitIn, LifetimeFitIn, SaturationFitIn, SpectrumFitIn
from emitterkit.infrastructure.dto.fitresultdto import FitResultDTO
from emitterkit.infrastructure.services.ifitting import IFittingService

router = APIRouter()


@router.post("/g2", response_model=FitResultDTO, status_code=200)
@inject
async def fit_g2(
    request: G2FitIn,
    service: IFittingService = Depends(Provide[Container.fitting_service]),
) -> dict:
    """An endpoint fitting the three-level model to a normalized g².

    Args:
        request (G2FitIn): Bin edges, raw and normalized values.
        service (IFittingService, optional): The injected service dependency.

    Returns:
        dict: The fit result.
    """

    edges = np.asarray(request.bin_edges_ps)
    hist = CorrelationHistogram(
        bin_edges=edges,
        raw_counts=np.asarray(request.raw_counts),
        normalized=np.asarray(request.normalized),
        normalization_factor=request.normalization_factor,
        lag_range=float(np.max(np.abs(edges))),
        binning=request.binning,
    )

    fit = service.fit_g2(hist, n_samples=request.n_samples, seed=request.seed)

    return FitResultDTO.from_result(fit).model_dump()


@router.post("/lifetime", response_model=FitResultDTO, status_code=200)
@inject
async def fit_lifetime(
    request: LifetimeFitIn,
    service: IFittingService = Depends(Provide[Container.fitting_service]),
) -> dict:
    """An endpoint fitting a mono-exponential decay to a TRPL histogram.

    Args:
        request (LifetimeFitIn): Bin edges and counts after sync.
        service (IFittingService, optional): The injected service dependency.

    Returns:
        dict: The fit result.
    """

    edges = np.asarray(request.bin_edges_ps)
    decay = DecayHistogram(
        bin_edges=edges,
        counts=np.asarray(request.counts),
        n_sync=0,
        period=request.period_ps or float(edges[-1] - edges[0]),
        jitter_sigma=request.jitter_sigma_ps,
    )

    fit = service.fit_lifetime(
        decay,
        fit_window=request.fit_window_ps,
        n_samples=request.n_samples,
        seed=request.seed,
    )

    return FitResultDTO.from_result(fit).model_dump()


@router.post("/saturation", response_model=FitResultDTO, status_code=200)
@inject
async def fit_saturation(
    request: SaturationFitIn,
    service: IFittingService = Depends(Provide[Container.fitting_service]),
) -> dict:
    """An endpoint fitting the saturation curve and the low-power slope.

    Args:
        request (SaturationFitIn): Powers and count rates.
        service (IFittingService, optional): The injected service dependency.

    Returns:
        dict: The fit result, classified by its power-law slope.
    """

    fit = service.fit_saturation(
        request.power_w,
        request.intensity_cps,
        n_samples=request.n_samples,
        seed=request.seed,
    )

    return FitResultDTO.from_result(fit).model_dump()


@router.post("/spectrum", response_model=FitResultDTO, status_code=200)
@inject
async def fit_spectrum(
    request: SpectrumFitIn,
    service: IFittingService = Depends(Provide[Container.fitting_service]),
) -> dict:
    """An endpoint decomposing a spectrum into pseudo-Voigt peaks.

    Args:
        request (SpectrumFitIn): Wavelengths in nanometers and counts.
        service (IFittingService, optional): The injected service dependency.

    Returns:
        dict: The fit result with parameters in meters.
    """

    spectrum = Spectrum(
        wavelength=np.asarray(request.wavelength_nm) * 1e-9,
        counts=np.asarray(request.counts),
    )

    fit = service.fit_spectrum(
        spectrum,
        request.n_peaks,
        fit_gauss_fraction=request.fit_gauss_fraction,
        n_samples=request.n_samples,
        seed=request.seed,
    )

    return FitResultDTO.from_result(fit).model_dump()
