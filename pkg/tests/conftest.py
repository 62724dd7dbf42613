"""Shared fixtures: a container with a fast configuration."""

from typing import Iterator

import pytest

from emitterkit.config import AppConfig
from emitterkit.container import Container
from emitterkit.core.domain.emitter import ThreeLevelParams


@pytest.fixture
def settings() -> AppConfig:
    return AppConfig(MC_SAMPLES=100, MIN_MC_SAMPLES=100, MAX_TAGS=5_000_000, N_JOBS=1)


@pytest.fixture
def container(settings: AppConfig) -> Iterator[Container]:
    container = Container()
    container.config.override(settings)
    yield container
    container.config.reset_override()


@pytest.fixture
def simulation_service(container: Container):
    return container.simulation_service()


@pytest.fixture
def correlator_service(container: Container):
    return container.correlator_service()


@pytest.fixture
def fitting_service(container: Container):
    return container.fitting_service()


@pytest.fixture
def thinfilm_service(container: Container):
    return container.thinfilm_service()


@pytest.fixture
def survey_service(container: Container):
    return container.survey_service()


@pytest.fixture
def report_service(container: Container):
    return container.report_service()


@pytest.fixture
def g2_params() -> ThreeLevelParams:
    return ThreeLevelParams(
        antibunch_amp=0.8,
        bunch_amp=0.1,
        excited_lifetime=2e-9,
        shelving_lifetime=20e-9,
    )
