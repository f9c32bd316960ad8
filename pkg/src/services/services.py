import logging
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

from src.errors import DegenerateInputError
from src.errors import DivergenceError
from src.errors import InvalidArgumentError
from src.errors import KernelCollisionError
from src.errors import NumericFailureError
from src.models.models import FunctionalSpec
from src.models.models import GammaChannel
from src.models.models import MultiplierFunction
from src.models.models import OperatorBundle
from src.models.models import OperatorFamily
from src.models.models import RieszKind
from src.models.models import SpectralDecomposition
from src.schemas.schemas import CheckResult
from src.schemas.schemas import ExperimentConfig
from src.schemas.schemas import Formulation
from src.schemas.schemas import FunctionalConfig
from src.schemas.schemas import FunctionalNormReport
from src.schemas.schemas import InequalityReport
from src.schemas.schemas import MultiplierConfig
from src.schemas.schemas import RBoundEstimate
from src.schemas.schemas import RieszReport
from src.schemas.schemas import SuiteReport
from src.schemas.schemas import SummaryRow
from src.services.battery import build_scenario
from src.services.battery import named_scenario
from src.services.battery import run_suite
from src.services.battery import spectral_summary
from src.services.dals import DecompositionCacheDAL
from src.services.dals import GraphDAL
from src.services.dals import ReportDAL
from src.services.functionals import FunctionalEvaluator
from src.services.functionals import estimate_functional_norm
from src.services.functionals import field_rows
from src.services.hashing import payload_digest
from src.services.rbound import build_family
from src.services.rbound import estimate_rbound_constant
from src.services.riesz import chen_decomposition_check
from src.services.riesz import estimate_riesz_norm
from src.services.riesz import multiplicative_inequality_check
from src.services.spectral import decompose

logger = logging.getLogger(__name__)

NUMERIC_FAILURES: Tuple[type, ...] = (
    DivergenceError,
    DegenerateInputError,
    KernelCollisionError,
    NumericFailureError,
)


def multiplier_from_config(config: MultiplierConfig) -> MultiplierFunction:
    if config.kind == "exp":
        base: MultiplierFunction = MultiplierFunction.heat()
    elif config.kind == "zexp":
        base = MultiplierFunction.zheat()
    elif config.kind == "poisson":
        base = MultiplierFunction.poisson()
    elif config.kind == "resolvent":
        base = MultiplierFunction.resolvent(
            delta_prime=config.delta_prime if config.delta_prime is not None else 1.0
        )
    elif config.kind == "bump":
        base = MultiplierFunction.bump()
    elif config.kind == "constant":
        return MultiplierFunction.constant_function(constant=config.constant)
    else:
        if config.exponent is None:
            raise InvalidArgumentError("multipliers.exponent is required for a power multiplier")
        base = MultiplierFunction.power(exponent=config.exponent)
    return base if config.scale == 1.0 else base.dilate(config.scale)


def spec_from_config(config: FunctionalConfig) -> FunctionalSpec:
    outer: MultiplierFunction = (
        multiplier_from_config(config.outer) if config.outer is not None else MultiplierFunction.heat()
    )
    return FunctionalSpec(
        kind=config.kind,
        channel=config.channel,
        multipliers=tuple(multiplier_from_config(m) for m in config.multipliers),
        outer=outer,
        combine=config.combine,
    )


class BaseService:
    """
    Базовый класс для всех сервисов в проекте (то есть классов,
    реализующих логику соответствующих команд)
    """

    def __init__(self, output_dir: str, cache_dir: Optional[str] = None) -> None:
        self.output_dir: str = output_dir
        self.graph_dal: GraphDAL = GraphDAL(root=output_dir)
        self.cache_dal: Optional[DecompositionCacheDAL] = (
            DecompositionCacheDAL(root=cache_dir) if cache_dir is not None else None
        )

    def reports(self, parameters: Dict[str, Any]) -> ReportDAL:
        return ReportDAL(root=self.output_dir, config_digest=payload_digest(parameters))

    def decompose(self, bundle: OperatorBundle, cap: Optional[int] = None) -> SpectralDecomposition:
        if self.cache_dal is not None:
            return self.cache_dal.decompose(bundle=bundle, cap=cap)
        return decompose(bundle=bundle, cap=cap)


class FunctionalService(BaseService):
    """Сервис эмпирических норм функционалов и выгрузки их значений по вершинам"""

    def estimate(
        self,
        bundle: OperatorBundle,
        spec: FunctionalSpec,
        exponents: Sequence[float],
        budget: int,
        seed: int,
        output_format: str = "both",
        export_field: bool = False,
    ) -> List[FunctionalNormReport]:
        dec: SpectralDecomposition = self.decompose(bundle=bundle)
        reports: List[FunctionalNormReport] = [
            estimate_functional_norm(bundle=bundle, spec=spec, p=p, budget=budget, seed=seed, dec=dec)
            for p in exponents
        ]
        parameters: Dict[str, Any] = {
            "bundle": bundle.graph.label,
            "functional": spec.label,
            "exponents": list(exponents),
            "budget": budget,
            "seed": seed,
        }
        dal: ReportDAL = self.reports(parameters=parameters)
        dal.write_records(
            stem="functional",
            records=reports,
            columns=FunctionalNormReport.CSV_COLUMNS,
            output_format=output_format,
            extra={"parameters": parameters},
        )
        if export_field and reports:
            witness = reports[-1].witness
            values = FunctionalEvaluator(bundle=bundle, dec=dec, spec=spec).evaluate(f_list=witness)
            rows: List[Dict[str, float]] = field_rows(bundle=bundle, values=values)
            dal.write_csv(name="functional_field.csv", columns=list(rows[0]), rows=rows)
        return reports


class RBoundService(BaseService):
    """Сервис оценок констант R-ограниченности по ряду размеров сценария"""

    def estimate(
        self,
        family_name: str,
        scenario: str,
        sizes: Sequence[int],
        p: float,
        budget: int,
        k_max: int,
        seed: int,
        formulation: Formulation = Formulation.SQUARE_FUNCTION,
        channel: GammaChannel = GammaChannel.BOTH,
        delta_prime: float = 1.0,
        output_format: str = "both",
    ) -> List[RBoundEstimate]:
        estimates: List[RBoundEstimate] = []
        for size in sizes:
            bundle: OperatorBundle = named_scenario(name=scenario, size=size)
            family: OperatorFamily = build_family(
                name=family_name,
                bundle=bundle,
                dec=self.decompose(bundle=bundle),
                channel=channel,
                delta_prime=delta_prime,
            )
            estimate: RBoundEstimate = estimate_rbound_constant(
                family=family, p=p, budget=budget, k_max=k_max, seed=seed, formulation=formulation
            )
            estimates.append(estimate.model_copy(update={"family": f"{estimate.family}@{bundle.graph.label}"}))

        parameters: Dict[str, Any] = {
            "family": family_name,
            "scenario": scenario,
            "sizes": list(sizes),
            "p": p,
            "budget": budget,
            "k_max": k_max,
            "seed": seed,
            "formulation": formulation.value,
        }
        self.reports(parameters=parameters).write_records(
            stem="rbound",
            records=estimates,
            columns=RBoundEstimate.CSV_COLUMNS,
            output_format=output_format,
            extra={"parameters": parameters},
        )
        return estimates


class RieszService(BaseService):
    """Сервис эмпирических норм преобразований Рисса и связанных неравенств"""

    def estimate(
        self,
        bundle: OperatorBundle,
        kinds: Sequence[RieszKind],
        p: float,
        budget: int,
        seed: int,
        channel: GammaChannel = GammaChannel.BOTH,
        output_format: str = "both",
    ) -> Tuple[List[RieszReport], List[InequalityReport]]:
        dec: SpectralDecomposition = self.decompose(bundle=bundle)
        reports: List[RieszReport] = [
            estimate_riesz_norm(
                bundle=bundle, kind=kind, p=p, budget=budget, seed=seed, dec=dec, channel=channel
            )
            for kind in kinds
        ]
        inequalities: List[InequalityReport] = [
            chen_decomposition_check(bundle=bundle, p=p, budget=budget, seed=seed, dec=dec, channel=channel),
            multiplicative_inequality_check(
                bundle=bundle, p=p, budget=budget, seed=seed, dec=dec, channel=channel
            ),
        ]
        parameters: Dict[str, Any] = {
            "bundle": bundle.graph.label,
            "kinds": [kind.value for kind in kinds],
            "p": p,
            "budget": budget,
            "seed": seed,
            "channel": channel.value,
        }
        dal: ReportDAL = self.reports(parameters=parameters)
        dal.write_records(
            stem="riesz",
            records=reports,
            columns=RieszReport.CSV_COLUMNS,
            output_format=output_format,
            extra={"parameters": parameters},
        )
        dal.write_records(
            stem="inequalities",
            records=inequalities,
            columns=InequalityReport.CSV_COLUMNS,
            output_format=output_format,
        )
        return reports, inequalities


class VerifyService(BaseService):
    """Сервис набора проверок"""

    def run(
        self, suite: str, seed: int, workers: int, output_format: str = "both"
    ) -> SuiteReport:
        report: SuiteReport = run_suite(name=suite, seed=seed, workers=workers)
        dal: ReportDAL = ReportDAL(root=self.output_dir, config_digest=report.config_digest)
        dal.write_records(
            stem=f"verify_{suite}",
            records=report.results,
            columns=CheckResult.CSV_COLUMNS,
            output_format=output_format,
            extra={"suite": report.suite, "seed": report.seed, "out_of_scope": report.out_of_scope},
        )
        return report


class ScenarioService(BaseService):
    """Сервис построения именованных сценариев"""

    def build(self, name: str, size: Optional[int] = None) -> Dict[str, Any]:
        bundle: OperatorBundle = named_scenario(name=name, size=size)
        summary: Dict[str, Any] = spectral_summary(bundle=bundle, dec=self.decompose(bundle=bundle))
        document: str = self.graph_dal.save_bundle(bundle=bundle, name=f"scenario_{name}.json")
        self.reports(parameters={"scenario": name, "size": size}).write_structured(
            name=f"scenario_{name}_summary.json", payload={"summary": summary, "document": document}
        )
        return summary


class ExperimentService(BaseService):
    """
    Сервис выполнения конфигурации эксперимента. Численные сбои отдельных оценок
    становятся строками отчёта со статусом error, а не исключениями
    """

    def run(self, config: ExperimentConfig) -> List[SummaryRow]:
        bundle: OperatorBundle = build_scenario(
            graph_config=config.graph,
            potential_config=config.potential,
            vertex_cap=config.vertex_cap,
        )
        dec: SpectralDecomposition = self.decompose(bundle=bundle, cap=config.vertex_cap)

        reports: List[FunctionalNormReport] = []
        rows: List[SummaryRow] = []
        for functional in config.functionals:
            spec: FunctionalSpec = spec_from_config(config=functional)
            for p in config.exponents:
                try:
                    report: FunctionalNormReport = estimate_functional_norm(
                        bundle=bundle, spec=spec, p=p, budget=config.budget, seed=config.seed, dec=dec
                    )
                except NUMERIC_FAILURES as exception:
                    logger.warning("%s at p=%g failed: %s", spec.label, p, exception)
                    rows.append(
                        SummaryRow(
                            scenario=config.scenario,
                            item=spec.label,
                            p=p,
                            status="error",
                            detail=f"{type(exception).__name__}: {exception}",
                        )
                    )
                    continue
                reports.append(report)
                detail: str = ""
                if report.identity_lhs is not None:
                    detail = f"rss identity {report.identity_lhs!r} vs {report.identity_rhs!r}"
                rows.append(
                    SummaryRow(
                        scenario=config.scenario,
                        item=spec.label,
                        p=p,
                        value=report.empirical_constant,
                        status="ok",
                        detail=detail,
                    )
                )

        dal: ReportDAL = ReportDAL(
            root=config.output.directory,
            config_digest=payload_digest(config.model_dump(mode="json")),
        )
        dal.write_records(
            stem=f"{config.scenario}_functionals",
            records=reports,
            columns=FunctionalNormReport.CSV_COLUMNS,
            output_format=config.output.format,
            extra={"config": config.model_dump(mode="json")},
        )
        dal.write_records(
            stem=f"{config.scenario}_summary",
            records=rows,
            columns=SummaryRow.CSV_COLUMNS,
            output_format=config.output.format,
        )
        return rows
