import logging
from concurrent.futures import Future
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from src import __version__
from src.errors import InvalidArgumentError
from src.errors import LabError
from src.errors import ResourceLimitError
from src.models.models import MultiplierFunction
from src.models.models import OperatorBundle
from src.models.models import SpectralDecomposition
from src.models.models import WeightedGraph
from src.schemas.schemas import CheckResult
from src.schemas.schemas import GraphConfig
from src.schemas.schemas import PotentialConfig
from src.schemas.schemas import SuiteReport
from src.schemas.schemas import Verdict
from src.services import verify
from src.services.graphs import build_connected_sum
from src.services.graphs import build_grid
from src.services.graphs import build_path_graph
from src.services.graphs import build_radial_graph
from src.services.graphs import component_sizes
from src.services.hashing import bundle_digest
from src.services.hashing import payload_digest
from src.services.operators import attach_divergence_form
from src.services.operators import attach_potential
from src.services.operators import checkerboard_coefficients
from src.services.potentials import constant_potential
from src.services.potentials import radial_power_potential
from src.services.potentials import random_potential
from src.services.potentials import zero_potential
from src.settings import project_settings

logger = logging.getLogger(__name__)

KAHANE_SIDE: int = 6
QUICK_KAHANE_INPUTS: int = 24
SUITE_NAMES: Tuple[str, ...] = ("default", "quick")
OUT_OF_SCOPE: Tuple[str, ...] = (
    "weak type (1,1) of the functionals at p = 1",
    "the sharp epsilon in the boundedness range q* + epsilon",
    "Gaussian upper bounds and volume doubling as such",
    "convergence rates of the continuous limit",
)

SCENARIOS: Dict[str, Tuple[GraphConfig, PotentialConfig]] = {
    "path": (GraphConfig(builder="path", size=32, dim=1), PotentialConfig()),
    "grid": (
        GraphConfig(builder="grid", size=16, dim=2),
        PotentialConfig(kind="random", value=1.0, seed=0),
    ),
    "dirichlet-grid": (GraphConfig(builder="dirichlet-grid", size=16, dim=2), PotentialConfig()),
    "radial": (
        GraphConfig(builder="radial", size=200, dim=3, spacing=3.0),
        PotentialConfig(kind="radial-power", exponent=1.5),
    ),
    "connected-sum": (
        GraphConfig(builder="connected-sum", size=16, dim=2, neck_width=1),
        PotentialConfig(),
    ),
    "sheet": (GraphConfig(builder="sheet", size=16, dim=2), PotentialConfig()),
    "checkerboard": (GraphConfig(builder="checkerboard", size=16, dim=2), PotentialConfig()),
}


def build_graph(config: GraphConfig) -> WeightedGraph:
    """Граф по схеме построителя"""

    if config.builder == "path":
        return build_path_graph(n=config.size, h=config.spacing)
    if config.builder == "radial":
        return build_radial_graph(n_dim=config.dim, r_max=config.spacing, m=config.size)
    if config.builder == "connected-sum":
        return build_connected_sum(n_dim=config.dim, side=config.size, neck_width=config.neck_width)
    dims: Tuple[int, ...] = (config.size,) * config.dim
    if config.builder == "dirichlet-grid":
        return build_grid(dims=dims, h=config.spacing, dirichlet=True)
    if config.builder == "sheet":
        return build_grid(dims=dims, h=1.0)
    return build_grid(dims=dims, h=config.spacing)


def build_potential(graph: WeightedGraph, config: PotentialConfig) -> np.ndarray:
    if config.kind == "constant":
        return constant_potential(graph=graph, value=config.value)
    if config.kind == "radial-power":
        return radial_power_potential(graph=graph, exponent=config.exponent)
    if config.kind == "random":
        return random_potential(graph=graph, high=config.value, seed=config.seed)
    return zero_potential(graph=graph)


def build_scenario(
    graph_config: GraphConfig,
    potential_config: PotentialConfig,
    vertex_cap: Optional[int] = None,
) -> OperatorBundle:
    """
    Собирает оператор сценария. Для checkerboard строится дивергентная форма,
    потенциал при этом должен быть нулевым
    """

    cap: int = vertex_cap if vertex_cap is not None else project_settings.VERTEX_CAP
    graph: WeightedGraph = build_graph(config=graph_config)
    if graph.n_vertices > cap:
        raise ResourceLimitError(
            f"scenario {graph.label} has {graph.n_vertices} vertices, above the vertex cap {cap}",
            cap=cap,
        )
    if graph_config.builder == "checkerboard":
        if potential_config.kind != "zero":
            raise InvalidArgumentError("the checkerboard scenario is in divergence form, V must be zero")
        return attach_divergence_form(grid=graph, A=checkerboard_coefficients(graph=graph))
    return attach_potential(graph=graph, V=build_potential(graph=graph, config=potential_config))


def named_scenario(name: str, size: Optional[int] = None) -> OperatorBundle:
    if name not in SCENARIOS:
        raise InvalidArgumentError(f"unknown scenario {name!r}; expected one of {sorted(SCENARIOS)}")
    graph_config, potential_config = SCENARIOS[name]
    if size is not None:
        graph_config = graph_config.model_copy(update={"size": size})
    return build_scenario(graph_config=graph_config, potential_config=potential_config)


def spectral_summary(bundle: OperatorBundle, dec: SpectralDecomposition) -> Dict[str, Any]:
    return {
        "label": bundle.graph.label,
        "form": bundle.form.value,
        "vertices": bundle.graph.n_vertices,
        "active_vertices": bundle.n,
        "edges": bundle.graph.n_edges,
        "components": list(component_sizes(bundle.graph)),
        "kernel_dim": dec.kernel_dim,
        "lambda_min_positive": dec.lambda_min_positive,
        "lambda_max": dec.lambda_max,
        "bundle_digest": bundle_digest(bundle),
    }


@dataclass(frozen=True)
class SuiteCheck:
    """
    Объявление проверки набора

    Атрибуты:
    check_id (str): Имя строки отчёта;
    exact (bool): Проверяется ли точное утверждение;
    run (Callable[[int], CheckResult]): Запуск по зерну
    """

    check_id: str
    exact: bool
    run: Callable[[int], CheckResult]


def _grid(size: int, dim: int = 2, V: float = 1.0, seed: int = 0) -> OperatorBundle:
    graph: WeightedGraph = build_grid(dims=(size,) * dim)
    potential: np.ndarray = (
        random_potential(graph=graph, high=V, seed=seed) if V > 0 else zero_potential(graph=graph)
    )
    return attach_potential(graph=graph, V=potential)


def _battery(sizes: Tuple[int, ...]) -> List[OperatorBundle]:
    bundles: List[OperatorBundle] = []
    for size in sizes:
        bundles.append(_grid(size=size, V=0.0))
        bundles.append(_grid(size=size, V=1.0))
        bundles.append(attach_potential(graph=build_connected_sum(n_dim=2, side=size, neck_width=1)))
    return bundles


def suite_checks(name: str) -> List[SuiteCheck]:
    """Проверки набора в порядке объявления; quick использует меньшие графы"""

    if name not in SUITE_NAMES:
        raise InvalidArgumentError(f"unknown suite {name!r}; expected one of {list(SUITE_NAMES)}")
    quick: bool = name == "quick"
    small: int = 6 if quick else 8
    sizes: Tuple[int, ...] = (6, 8, 12) if quick else (8, 16, 32)
    probes: int = 4 if quick else 8
    refinements: Tuple[int, ...] = (50, 100, 200) if quick else (100, 200, 400)
    sum_sizes: Tuple[int, ...] = (4, 8, 16) if quick else (8, 16, 32)

    def base() -> OperatorBundle:
        return _grid(size=small)

    def ladder() -> Tuple[OperatorBundle, List[OperatorBundle]]:
        first, *rest = [_grid(size=size, V=0.0) for size in sizes]
        return first, rest

    def stein(p: float) -> Callable[[int], CheckResult]:
        def run(seed: int) -> CheckResult:
            first, rest = ladder()
            return verify.check_stein_upper(
                bundle=first, p=p, probes=probes, seed=seed, refinements=rest if p != 2.0 else ()
            )

        return run

    def lower(q: float) -> Callable[[int], CheckResult]:
        def run(seed: int) -> CheckResult:
            first, rest = ladder()
            return verify.check_lower_bound_q(
                bundle=first, q=q, probes=probes, seed=seed, refinements=rest if q != 2.0 else ()
            )

        return run

    def q_lower(q: float) -> Callable[[int], CheckResult]:
        def run(seed: int) -> CheckResult:
            first, rest = ladder()
            return verify.check_Q_lower(bundle=first, q=q, probes=probes, seed=seed, refinements=rest)

        return run

    def uniform(p: float) -> Callable[[int], CheckResult]:
        def run(seed: int) -> CheckResult:
            first, rest = ladder()
            return verify.check_uniform_bound(
                bundle=first, p=p, budget=probes, seed=seed, refinements=rest
            )

        return run

    def study(p: float, local: bool) -> Callable[[int], CheckResult]:
        def run(seed: int) -> CheckResult:
            check = verify.check_local_equivalence if local else verify.check_equivalence_study
            return check(p=p, battery=_battery(sizes=sizes[:2]), budget=probes, seed=seed)

        return run

    return [
        SuiteCheck(
            "lps_p2_identity", True, lambda seed: verify.check_lps_p2_identity(bundle=base(), seed=seed)
        ),
        SuiteCheck("riesz_p2", True, lambda seed: verify.check_riesz_p2(bundle=base(), seed=seed)),
        SuiteCheck(
            "chen_triangle", True, lambda seed: verify.check_chen_triangle(bundle=base(), seed=seed)
        ),
        SuiteCheck(
            "multiplicative_p2",
            True,
            lambda seed: verify.check_multiplicative_p2(bundle=base(), seed=seed),
        ),
        SuiteCheck("stein_upper_p2", True, stein(2.0)),
        SuiteCheck("stein_upper_p1.5", False, stein(1.5)),
        SuiteCheck("lower_bound_q2", True, lower(2.0)),
        SuiteCheck("lower_bound_q4", False, lower(4.0)),
        SuiteCheck(
            "reverse_duality",
            False,
            lambda seed: verify.check_reverse_duality(
                bundle=base(), q=2.0, multipliers=(MultiplierFunction.heat(),), probes=probes, seed=seed
            ),
        ),
        SuiteCheck("Q_lower_q2", False, q_lower(2.0)),
        SuiteCheck("Q_lower_q4", False, q_lower(4.0)),
        SuiteCheck(
            "shen_counterexample",
            False,
            lambda seed: verify.check_shen_counterexample(n_dim=3, q0=2.0, refinements=refinements),
        ),
        SuiteCheck(
            "connected_sum_growth",
            False,
            lambda seed: verify.check_connected_sum_growth(
                n_dim=2, p=4.0, sizes=sum_sizes, budget=probes, seed=seed
            ),
        ),
        SuiteCheck("uniform_bound_p2", True, uniform(2.0)),
        SuiteCheck("uniform_bound_p1.5", False, uniform(1.5)),
        SuiteCheck("equivalence_study_p2", False, study(2.0, local=False)),
        SuiteCheck("equivalence_study_p1.5", False, study(1.5, local=False)),
        SuiteCheck("local_equivalence_p1.5", False, study(1.5, local=True)),
        SuiteCheck(
            "multiplier_order",
            False,
            lambda seed: verify.check_multiplier_order(bundle=base(), p=1.5, budget=probes, seed=seed),
        ),
        SuiteCheck(
            "kahane_consistency",
            False,
            lambda seed: verify.check_kahane_consistency(
                bundle=_grid(size=KAHANE_SIDE),
                inputs=QUICK_KAHANE_INPUTS if quick else verify.KAHANE_INPUTS,
                seed=seed,
            ),
        ),
        SuiteCheck(
            "reverse_holder_growth",
            False,
            lambda seed: verify.check_reverse_holder_growth(refinements=refinements),
        ),
    ]


def _failed(check: SuiteCheck, seed: int, exception: Exception) -> CheckResult:
    logger.warning("check %s failed: %s", check.check_id, exception)
    return CheckResult(
        check_id=check.check_id,
        inputs_digest=payload_digest({"check": check.check_id, "seed": seed}),
        verdict=Verdict.VIOLATION if check.exact else Verdict.OBSERVE,
        tolerance=0.0,
        exact=check.exact,
        notes=[f"{type(exception).__name__}: {exception}"],
    )


def _run_check(check: SuiteCheck, seed: int) -> CheckResult:
    try:
        result: CheckResult = check.run(seed)
    except LabError as exception:
        return _failed(check=check, seed=seed, exception=exception)
    return result.model_copy(update={"check_id": check.check_id})


def run_suite(name: str = "default", seed: int = 0, workers: int = 1) -> SuiteReport:
    """
    Выполняет набор в пуле потоков. Результаты собираются в порядке объявления и
    не зависят от числа потоков
    """

    if workers < 1:
        raise InvalidArgumentError(f"workers must be at least 1, got {workers}")
    checks: List[SuiteCheck] = suite_checks(name=name)
    logger.info("running suite %s: %d checks, seed %d, %d workers", name, len(checks), seed, workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures: List[Future] = [pool.submit(_run_check, check, seed) for check in checks]
        results: List[CheckResult] = [future.result() for future in futures]

    return SuiteReport(
        suite=name,
        seed=seed,
        tool_version=__version__,
        config_digest=payload_digest(
            {"suite": name, "seed": seed, "checks": [check.check_id for check in checks]}
        ),
        results=results,
        out_of_scope=list(OUT_OF_SCOPE),
    )
