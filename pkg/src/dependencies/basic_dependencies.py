from typing import Optional

from src.services.services import ExperimentService
from src.services.services import FunctionalService
from src.services.services import RBoundService
from src.services.services import RieszService
from src.services.services import ScenarioService
from src.services.services import VerifyService


def get_functional_service(output_dir: str, cache_dir: Optional[str] = None) -> FunctionalService:
    return FunctionalService(output_dir=output_dir, cache_dir=cache_dir)


def get_rbound_service(output_dir: str, cache_dir: Optional[str] = None) -> RBoundService:
    return RBoundService(output_dir=output_dir, cache_dir=cache_dir)


def get_riesz_service(output_dir: str, cache_dir: Optional[str] = None) -> RieszService:
    return RieszService(output_dir=output_dir, cache_dir=cache_dir)


def get_verify_service(output_dir: str) -> VerifyService:
    return VerifyService(output_dir=output_dir)


def get_scenario_service(output_dir: str, cache_dir: Optional[str] = None) -> ScenarioService:
    return ScenarioService(output_dir=output_dir, cache_dir=cache_dir)


def get_experiment_service(output_dir: str, cache_dir: Optional[str] = None) -> ExperimentService:
    return ExperimentService(output_dir=output_dir, cache_dir=cache_dir)
