from enum import Enum
from typing import Any
from typing import ClassVar
from typing import Dict
from typing import List
from typing import Literal
from typing import Optional
from typing import Tuple

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator

from src.models.models import CombineRule
from src.models.models import FunctionalKind
from src.models.models import GammaChannel
from src.models.models import RieszKind
from src.schemas.mixins import ExponentValidationMixin
from src.schemas.mixins import RunValidationMixin

HISTOGRAM_EDGES: Tuple[float, ...] = tuple(float(edge) for edge in np.logspace(-6.0, 2.0, 33))
SCHEMA_VERSION: int = 1


class Verdict(str, Enum):
    PASS = "pass"
    OBSERVE = "observe"
    VIOLATION = "violation"


class Formulation(str, Enum):
    EXPECTATION = "expectation"
    SQUARE_FUNCTION = "square_function"
    L2_VALUED = "l2_valued"


def ratio_histogram(samples: List[float]) -> List[int]:
    """Счётчики по фиксированным логарифмическим корзинам + недолёт и перелёт"""

    values: np.ndarray = np.asarray(samples, dtype=np.float64)
    edges: np.ndarray = np.asarray(HISTOGRAM_EDGES)
    inner, _ = np.histogram(values, bins=edges)
    underflow: int = int(np.count_nonzero(values < edges[0]))
    overflow: int = int(np.count_nonzero(values > edges[-1]))
    return [underflow] + [int(count) for count in inner] + [overflow]


class FunctionalNormReport(BaseModel):
    """
    Схема эмпирической нормы функционала Литтлвуда-Пэли-Стейна

    Атрибуты:
    kind (FunctionalKind): Вид функционала;
    channel (GammaChannel): Каналы Γ;
    combine (CombineRule): Правило сложения каналов;
    multipliers (List[str]): Имена мультипликаторов m_k;
    p (float): Показатель Лебега;
    budget (int): Число шагов поиска;
    seed (int): Зерно;
    empirical_constant (float): Наибольшее отношение ‖H(f)‖_p/‖f‖_p (нижняя оценка нормы);
    witness_digest (str): sha256 функции, на которой достигнут максимум;
    witness_index (int): Шаг поиска, на котором найден максимум;
    probes_evaluated (int): Число вычисленных проб;
    probes_skipped (int): Число проб, отброшенных из-за расходимости;
    identity_lhs (Optional[float]): ‖H(f)‖₂² в форме rss для witness (только при p = 2);
    identity_rhs (Optional[float]): ½‖f_⊥‖₂² для witness (только при p = 2);
    witness (Optional[np.ndarray]): Сама функция, в отчёты не выгружается
    """

    CSV_COLUMNS: ClassVar[Tuple[str, ...]] = (
        "kind",
        "channel",
        "combine",
        "p",
        "budget",
        "seed",
        "empirical_constant",
        "witness_digest",
        "witness_index",
        "probes_evaluated",
        "probes_skipped",
        "identity_lhs",
        "identity_rhs",
    )

    kind: FunctionalKind
    channel: GammaChannel
    combine: CombineRule
    multipliers: List[str]
    p: float
    budget: int
    seed: int
    empirical_constant: float
    witness_digest: str
    witness_index: int
    probes_evaluated: int
    probes_skipped: int
    identity_lhs: Optional[float] = None
    identity_rhs: Optional[float] = None
    witness: Optional[np.ndarray] = Field(default=None, exclude=True, repr=False)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class RBoundEstimate(ExponentValidationMixin, BaseModel):
    """
    Схема оценки константы R-ограниченности

    Атрибуты:
    family (str): Имя семейства операторов;
    formulation (Formulation): Форма (матожидание, квадратичная функция, L²-значная);
    p (float): Показатель Лебега;
    seed (Optional[int]): Зерно (нет для детерминированных форм);
    trials (int): Число испытаний (наборов знаков или случайных входов);
    ratio_samples (List[float]): Отношения по испытаниям или пакетам;
    empirical_constant (float): Максимум ratio_samples;
    mean_ratio (float): Среднее отношение;
    second_moment_ratio (Optional[float]): Отношение вторых моментов (только форма матожидания);
    histogram (List[int]): Счётчики по фиксированным корзинам HISTOGRAM_EDGES;
    best_t_list (List[float]): Значения t на лучшем входе;
    exact_p2_bound (Optional[float]): Точная граница при p = 2, если известна
    """

    CSV_COLUMNS: ClassVar[Tuple[str, ...]] = (
        "family",
        "formulation",
        "p",
        "seed",
        "trials",
        "empirical_constant",
        "mean_ratio",
        "second_moment_ratio",
        "exact_p2_bound",
    )

    family: str
    formulation: Formulation
    p: float
    seed: Optional[int] = None
    trials: int
    ratio_samples: List[float]
    empirical_constant: float
    mean_ratio: float
    second_moment_ratio: Optional[float] = None
    histogram: List[int] = Field(default_factory=list)
    best_t_list: List[float] = Field(default_factory=list)
    exact_p2_bound: Optional[float] = None

    @model_validator(mode="after")
    def check_constant(self) -> "RBoundEstimate":
        if not self.ratio_samples:
            raise ValueError("an estimate needs at least one ratio sample")
        if any(sample < 0 for sample in self.ratio_samples):
            raise ValueError("ratios must be nonnegative")
        if self.empirical_constant != max(self.ratio_samples):
            raise ValueError("empirical constant must equal the largest ratio sample")
        return self


class RieszReport(BaseModel):
    """
    Схема эмпирической нормы преобразования Рисса

    Атрибуты:
    kind (RieszKind): Полное, локальное или на бесконечности;
    channel (GammaChannel): Каналы Γ;
    p (float): Показатель Лебега;
    budget (int): Число шагов поиска;
    seed (int): Зерно;
    empirical_norm (float): Наибольшее ‖R f‖_p/‖f‖_p;
    witness_digest (str): sha256 функции-свидетеля;
    kernel_dim (int): Размерность ядра L (исключается проекцией);
    exact_p2_norm (Optional[float]): Точная норма в L² по спектральному разложению;
    residuals (Dict[str, float]): Невязки разложений и тождеств;
    witness (Optional[np.ndarray]): Функция-свидетель, в отчёты не выгружается
    """

    CSV_COLUMNS: ClassVar[Tuple[str, ...]] = (
        "kind",
        "channel",
        "p",
        "budget",
        "seed",
        "empirical_norm",
        "exact_p2_norm",
        "kernel_dim",
        "witness_digest",
    )

    kind: RieszKind
    channel: GammaChannel
    p: float
    budget: int
    seed: int
    empirical_norm: float
    witness_digest: str
    kernel_dim: int
    exact_p2_norm: Optional[float] = None
    residuals: Dict[str, float] = Field(default_factory=dict)
    witness: Optional[np.ndarray] = Field(default=None, exclude=True, repr=False)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class InequalityReport(BaseModel):
    """
    Схема проверки неравенства на пробных функциях

    Атрибуты:
    name (str): Имя неравенства;
    p (float): Показатель Лебега;
    max_value (float): Наибольшее значение проверяемой величины по пробам;
    witness_digest (str): sha256 функции, на которой достигнут максимум;
    probes_evaluated (int): Число вычисленных проб;
    probes_skipped (int): Число пропущенных проб;
    measured (Dict[str, float]): Дополнительные величины
    """

    CSV_COLUMNS: ClassVar[Tuple[str, ...]] = (
        "name",
        "p",
        "max_value",
        "probes_evaluated",
        "probes_skipped",
        "witness_digest",
    )

    name: str
    p: float
    max_value: float
    witness_digest: str
    probes_evaluated: int
    probes_skipped: int
    measured: Dict[str, float] = Field(default_factory=dict)


class CheckResult(BaseModel):
    """
    Схема результата именованной проверки

    Атрибуты:
    check_id (str): Имя проверки;
    inputs_digest (str): sha256 входных данных (параметры, графы, зерно);
    measured (Dict[str, Any]): Измеренные величины;
    verdict (Verdict): pass, observe или violation;
    tolerance (float): Использованный допуск;
    exact (bool): Проверяется ли точное математическое утверждение;
    notes (List[str]): Пояснения к вердикту;
    runtime (float): Время выполнения в секундах, в отчёты не выгружается
    """

    CSV_COLUMNS: ClassVar[Tuple[str, ...]] = (
        "check_id",
        "verdict",
        "exact",
        "tolerance",
        "inputs_digest",
        "notes",
    )

    check_id: str
    inputs_digest: str
    measured: Dict[str, Any] = Field(default_factory=dict)
    verdict: Verdict
    tolerance: float
    exact: bool = False
    notes: List[str] = Field(default_factory=list)
    runtime: float = Field(default=0.0, exclude=True)

    @model_validator(mode="after")
    def check_verdict_lattice(self) -> "CheckResult":
        if self.verdict is Verdict.VIOLATION and not self.exact:
            raise ValueError("only exact statements may produce a violation verdict")
        return self


class GraphConfig(BaseModel):
    """
    Схема построителя графа

    Атрибуты:
    builder (str): path, grid, dirichlet-grid, radial, connected-sum, sheet или checkerboard;
    size (int): Основной размер (число вершин пути, сторона сетки, число радиусов);
    dim (int): Размерность;
    spacing (float): Шаг сетки или r_max для радиального графа;
    neck_width (int): Ширина горловины связной суммы
    """

    builder: Literal[
        "path", "grid", "dirichlet-grid", "radial", "connected-sum", "sheet", "checkerboard"
    ]
    size: int = Field(ge=2)
    dim: int = Field(default=2, ge=1)
    spacing: float = Field(default=1.0, gt=0)
    neck_width: int = Field(default=1, ge=1)

    model_config = ConfigDict(extra="forbid")


class PotentialConfig(BaseModel):
    """
    Схема потенциала

    Атрибуты:
    kind (str): zero, constant, radial-power или random;
    value (float): Значение постоянного потенциала или верхняя граница случайного;
    exponent (float): Показатель a в |x|^{−a};
    seed (int): Зерно случайного потенциала
    """

    kind: Literal["zero", "constant", "radial-power", "random"] = "zero"
    value: float = Field(default=0.0, ge=0)
    exponent: float = 0.0
    seed: int = Field(default=0, ge=0)

    model_config = ConfigDict(extra="forbid")


class MultiplierConfig(BaseModel):
    """
    Схема мультипликатора

    Атрибуты:
    kind (str): Вид мультипликатора (exp, zexp, poisson, resolvent, bump, constant, power);
    scale (float): Растяжение аргумента;
    delta_prime (Optional[float]): Показатель резольвенты;
    exponent (Optional[float]): Показатель степенной функции;
    constant (float): Значение постоянного мультипликатора
    """

    kind: Literal["exp", "zexp", "poisson", "resolvent", "bump", "constant", "power"]
    scale: float = Field(default=1.0, gt=0)
    delta_prime: Optional[float] = None
    exponent: Optional[float] = None
    constant: float = 1.0

    model_config = ConfigDict(extra="forbid")


class FunctionalConfig(BaseModel):
    """
    Схема функционала

    Атрибуты:
    kind (FunctionalKind): Вид функционала;
    channel (GammaChannel): Каналы Γ;
    combine (CombineRule): Правило сложения каналов;
    multipliers (List[MultiplierConfig]): Мультипликаторы m_k (по умолчанию m ≡ 1);
    outer (Optional[MultiplierConfig]): Внешняя функция F для H_F
    """

    kind: FunctionalKind
    channel: GammaChannel = GammaChannel.BOTH
    combine: CombineRule = CombineRule.SUM
    multipliers: List[MultiplierConfig] = Field(
        default_factory=lambda: [MultiplierConfig(kind="constant")]
    )
    outer: Optional[MultiplierConfig] = None

    model_config = ConfigDict(extra="forbid")


class OutputConfig(BaseModel):
    """
    Схема вывода

    Атрибуты:
    directory (str): Каталог отчётов;
    format (str): csv, structured или both
    """

    directory: str = "reports"
    format: Literal["csv", "structured", "both"] = "both"

    model_config = ConfigDict(extra="forbid")


class ExperimentConfig(ExponentValidationMixin, RunValidationMixin, BaseModel):
    """
    Схема конфигурации эксперимента (YAML)

    Атрибуты:
    schema_version (int): Версия схемы, сейчас 1;
    scenario (str): Имя сценария;
    graph (GraphConfig): Построитель графа;
    potential (PotentialConfig): Потенциал;
    functionals (List[FunctionalConfig]): Функционалы для оценки;
    exponents (List[float]): Показатели p;
    budget (int): Бюджет поиска;
    seed (int): Зерно, обязательно;
    output (OutputConfig): Вывод;
    vertex_cap (Optional[int]): Предел числа вершин для этого запуска
    """

    schema_version: Literal[1]
    scenario: str
    graph: GraphConfig
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    functionals: List[FunctionalConfig]
    exponents: List[float]
    budget: int = 8
    seed: int
    output: OutputConfig = Field(default_factory=OutputConfig)
    vertex_cap: Optional[int] = Field(default=None, ge=1)

    model_config = ConfigDict(extra="forbid")


class SummaryRow(BaseModel):
    """
    Схема строки сводной таблицы запуска

    Атрибуты:
    scenario (str): Сценарий;
    item (str): Что оценивалось;
    p (float): Показатель Лебега;
    value (Optional[float]): Полученное значение;
    status (str): ok, error или вердикт проверки;
    detail (str): Пояснение
    """

    CSV_COLUMNS: ClassVar[Tuple[str, ...]] = ("scenario", "item", "p", "value", "status", "detail")

    scenario: str
    item: str
    p: float
    value: Optional[float] = None
    status: str
    detail: str = ""


class SuiteReport(BaseModel):
    """
    Схема отчёта набора проверок

    Атрибуты:
    suite (str): Имя набора (default или quick);
    seed (int): Зерно набора;
    tool_version (str): Версия инструмента;
    config_digest (str): sha256 параметров набора;
    results (List[CheckResult]): Результаты в порядке объявления проверок;
    out_of_scope (List[str]): Утверждения, не проверяемые численно
    """

    suite: str
    seed: int
    tool_version: str
    config_digest: str
    results: List[CheckResult] = Field(default_factory=list)
    out_of_scope: List[str] = Field(default_factory=list)

    @property
    def has_violation(self) -> bool:
        return any(result.verdict is Verdict.VIOLATION for result in self.results)

    def counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {verdict.value: 0 for verdict in Verdict}
        for result in self.results:
            counts[result.verdict.value] += 1
        return counts
