"""A module containing thin-film OPL endpoints."""

from dependency_injector.wiring import Provide, inject
from fastapi import APIRouter, Depends

from emitterkit.container import Container
from emitterkit.core.domain.requests import CalibrateIn, CurveIn, InvertIn
from emitterkit.core.domain.thinfilm import IndexEstimate, OplCurve, ThicknessEstimate
from emitterkit.infrastructure.dto.curvedto import OplCurveDTO
from emitterkit.infrastructure.services.ithinfilm import IThinFilmService

router = APIRouter()


def _curve(request: CurveIn, service: IThinFilmService) -> OplCurve:
    wavelength = request.wavelength_nm * 1e-9 if request.wavelength_nm else None
    stack = request.stack or service.default_stack(wavelength)

    return service.build_opl_curve(
        stack,
        complex(request.flake_n, request.flake_k),
        (request.start_nm * 1e-9, request.stop_nm * 1e-9),
        wavelength=wavelength,
        step=request.step_nm * 1e-9 if request.step_nm else None,
    )


@router.post("/curve", response_model=OplCurveDTO, status_code=200)
@inject
async def build_curve(
    request: CurveIn,
    service: IThinFilmService = Depends(Provide[Container.thinfilm_service]),
) -> dict:
    """An endpoint simulating excess OPL versus flake thickness.

    Args:
        request (CurveIn): Stack, flake index and thickness range.
        service (IThinFilmService, optional): The injected service dependency.

    Returns:
        dict: The curve in nanometers with its injectivity limit.
    """

    return OplCurveDTO.from_curve(_curve(request, service)).model_dump()


@router.post("/invert", response_model=ThicknessEstimate, status_code=200)
@inject
async def invert(
    request: InvertIn,
    service: IThinFilmService = Depends(Provide[Container.thinfilm_service]),
) -> dict:
    """An endpoint converting a measured OPL into flake thickness.

    Args:
        request (InvertIn): Curve settings and the measured OPL.
        service (IThinFilmService, optional): The injected service dependency.

    Returns:
        dict: The thickness in meters, or the ambiguous candidates.
    """

    estimate = service.invert_opl(_curve(request, service), request.opl_nm * 1e-9)

    return estimate.model_dump()


@router.post("/calibrate", response_model=IndexEstimate, status_code=200)
@inject
async def calibrate(
    request: CalibrateIn,
    service: IThinFilmService = Depends(Provide[Container.thinfilm_service]),
) -> dict:
    """An endpoint fitting the flake index to AFM-calibrated OPLs.

    Args:
        request (CalibrateIn): (thickness, OPL) pairs in nanometers.
        service (IThinFilmService, optional): The injected service dependency.

    Returns:
        dict: The index with its interval.
    """

    wavelength = request.wavelength_nm * 1e-9 if request.wavelength_nm else None
    estimate = service.fit_index(
        [(t * 1e-9, v * 1e-9) for t, v in request.points_nm],
        request.stack or service.default_stack(wavelength),
        wavelength=wavelength,
        n_samples=request.n_samples,
        seed=request.seed,
    )

    return estimate.model_dump()
