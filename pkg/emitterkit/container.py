"""Module providing containers injecting dependencies."""

from dependency_injector.containers import DeclarativeContainer
from dependency_injector.providers import Factory, Object, Singleton

from emitterkit.config import config
from emitterkit.infrastructure.repositories.tablefile import TableFileRepository
from emitterkit.infrastructure.repositories.timetagfile import TimeTagFileRepository
from emitterkit.infrastructure.services.correlator import CorrelatorService
from emitterkit.infrastructure.services.fitting import FittingService
from emitterkit.infrastructure.services.report import ReportService
from emitterkit.infrastructure.services.simulation import SimulationService
from emitterkit.infrastructure.services.survey import SurveyService
from emitterkit.infrastructure.services.thinfilm import ThinFilmService


class Container(DeclarativeContainer):
    """Container class for dependency injecting purposes."""
    config = Object(config)

    timetag_repository = Singleton(TimeTagFileRepository)
    table_repository = Singleton(TableFileRepository)

    simulation_service = Factory(
        SimulationService,
        config=config,
    )
    correlator_service = Factory(
        CorrelatorService,
        config=config,
    )
    fitting_service = Factory(
        FittingService,
        config=config,
    )
    thinfilm_service = Factory(
        ThinFilmService,
        fitting_service=fitting_service,
        config=config,
    )
    survey_service = Factory(
        SurveyService,
        fitting_service=fitting_service,
        correlator_service=correlator_service,
        repository=table_repository,
        config=config,
    )
    report_service = Factory(
        ReportService,
        fitting_service=fitting_service,
        correlator_service=correlator_service,
        survey_service=survey_service,
        timetag_repository=timetag_repository,
        table_repository=table_repository,
    )
