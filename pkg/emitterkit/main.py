"""Main module of the app"""

import logging
from contextlib import asynccontextmanager
from typing import AsyncGenerator

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from emitterkit.api.routers.fit import router as fit_router
from emitterkit.api.routers.model import router as model_router
from emitterkit.api.routers.survey import router as survey_router
from emitterkit.api.routers.thinfilm import router as thinfilm_router
from emitterkit.config import config
from emitterkit.container import Container
from emitterkit.core.errors import EmitterKitError
from emitterkit.utils.logs import configure_logging

logger = logging.getLogger(__name__)

container = Container()
container.wire(modules=[
    "emitterkit.api.routers.model",
    "emitterkit.api.routers.fit",
    "emitterkit.api.routers.thinfilm",
    "emitterkit.api.routers.survey",
])


@asynccontextmanager
async def lifespan(_: FastAPI) -> AsyncGenerator:
    """Lifespan function working on app startup."""
    configure_logging(config.LOG_LEVEL)
    yield


app = FastAPI(title="emitterkit", lifespan=lifespan)
app.include_router(model_router, prefix="/model")
app.include_router(fit_router, prefix="/fit")
app.include_router(thinfilm_router, prefix="/thinfilm")
app.include_router(survey_router, prefix="/survey")


@app.exception_handler(EmitterKitError)
async def emitterkit_exception_handle_logging(
    request: Request,
    exception: EmitterKitError,
) -> Response:
    """A function rendering toolkit errors with their status codes.

    Args:
        request (Request): The incoming HTTP request.
        exception (EmitterKitError): A related exception.

    Returns:
        Response: The HTTP response.
    """

    logger.warning("%s %s failed: %s", request.method, request.url.path, exception.code)
    return JSONResponse(status_code=exception.status_code, content=exception.to_dict())
