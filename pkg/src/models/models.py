from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from functools import cached_property
from typing import Callable
from typing import Optional
from typing import Tuple

import networkx as nx
import numpy as np
from scipy import interpolate
from scipy import sparse

from src.errors import InvalidArgumentError


def _frozen(values, dtype) -> np.ndarray:
    array: np.ndarray = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class GammaChannel(str, Enum):
    """Каналы оператора Γ: градиент, умножение на √V или оба сразу"""

    GRADIENT = "gradient"
    POTENTIAL = "potential"
    BOTH = "both"


class OperatorForm(str, Enum):
    SCHRODINGER = "schrodinger"
    DIVERGENCE = "divergence"


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """
    Взвешенный граф: дискретное пространство с мерой

    Атрибуты:
    measure (np.ndarray): Положительная мера вершин (аналог dx);
    edges (np.ndarray): Массив рёбер формы (E, 2), без петель и кратных рёбер;
    conductance (np.ndarray): Положительные проводимости рёбер;
    positions (Optional[np.ndarray]): Координаты вершин формы (n, d);
    boundary (np.ndarray): Булева маска вершин с условием Дирихле;
    grid_shape (Optional[Tuple[int, ...]]): Форма тензорной сетки, если граф построен как сетка;
    spacing (Optional[float]): Шаг сетки;
    edge_axis (Optional[np.ndarray]): Ось сетки для каждого ребра;
    label (str): Человекочитаемое имя графа
    """

    measure: np.ndarray
    edges: np.ndarray
    conductance: np.ndarray
    positions: Optional[np.ndarray] = None
    boundary: Optional[np.ndarray] = None
    grid_shape: Optional[Tuple[int, ...]] = None
    spacing: Optional[float] = None
    edge_axis: Optional[np.ndarray] = None
    label: str = "graph"

    def __post_init__(self) -> None:
        measure: np.ndarray = _frozen(self.measure, np.float64)
        edges: np.ndarray = _frozen(np.reshape(self.edges, (-1, 2)), np.int64)
        conductance: np.ndarray = _frozen(self.conductance, np.float64)

        if measure.ndim != 1 or measure.size == 0:
            raise InvalidArgumentError("measure must be a nonempty vector")
        if not np.all(measure > 0):
            raise InvalidArgumentError("all vertex measures must be strictly positive")
        if conductance.shape != (edges.shape[0],):
            raise InvalidArgumentError("conductance must have one entry per edge")
        if not np.all(conductance > 0):
            raise InvalidArgumentError("all conductances must be strictly positive")
        if edges.size and (edges.min() < 0 or edges.max() >= measure.size):
            raise InvalidArgumentError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise InvalidArgumentError("self-loops are not allowed")
        pairs: np.ndarray = np.sort(edges, axis=1)
        if np.unique(pairs, axis=0).shape[0] != pairs.shape[0]:
            raise InvalidArgumentError("at most one edge per unordered pair is allowed")

        boundary = (
            np.zeros(measure.size, dtype=bool) if self.boundary is None else self.boundary
        )
        boundary = _frozen(boundary, bool)
        if boundary.shape != measure.shape:
            raise InvalidArgumentError("boundary mask must have one flag per vertex")
        if boundary.all():
            raise InvalidArgumentError("at least one vertex must be interior")

        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "conductance", conductance)
        object.__setattr__(self, "boundary", boundary)

        if self.positions is not None:
            positions: np.ndarray = _frozen(self.positions, np.float64)
            if positions.ndim == 1:
                positions = _frozen(positions[:, None], np.float64)
            if positions.shape[0] != measure.size:
                raise InvalidArgumentError("positions must have one row per vertex")
            object.__setattr__(self, "positions", positions)
        if self.edge_axis is not None:
            object.__setattr__(self, "edge_axis", _frozen(self.edge_axis, np.int64))
        if self.grid_shape is not None:
            object.__setattr__(
                self, "grid_shape", tuple(int(size) for size in self.grid_shape)
            )

    @property
    def n_vertices(self) -> int:
        return int(self.measure.size)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def is_grid(self) -> bool:
        return self.grid_shape is not None and self.edge_axis is not None

    @property
    def has_dirichlet(self) -> bool:
        return bool(self.boundary.any())

    def to_networkx(self) -> nx.Graph:
        graph: nx.Graph = nx.Graph()
        graph.add_nodes_from(range(self.n_vertices))
        graph.add_weighted_edges_from(
            (int(u), int(v), float(w))
            for (u, v), w in zip(self.edges, self.conductance)
        )
        return graph

    def component_count(self) -> int:
        return nx.number_connected_components(self.to_networkx())


@dataclass(frozen=True, eq=False)
class GammaOperator:
    """
    Реберный оператор Γ: строки матрицы принадлежат вершинам, так что
    |Γf|(x)² = Σ по строкам вершины x от (Γf)_r²

    Атрибуты:
    matrix (sparse.csr_matrix): Матрица формы (rows, n);
    owner (np.ndarray): Вершина-владелец каждой строки;
    n_vertices (int): Число активных вершин;
    channel (GammaChannel): Канал, который реализует оператор
    """

    matrix: sparse.csr_matrix
    owner: np.ndarray
    n_vertices: int
    channel: GammaChannel

    @cached_property
    def aggregator(self) -> sparse.csr_matrix:
        rows: int = self.owner.size
        return sparse.csr_matrix(
            (np.ones(rows), (self.owner, np.arange(rows))),
            shape=(self.n_vertices, rows),
        )

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def energy(self, rows: np.ndarray) -> np.ndarray:
        return np.asarray(self.aggregator @ np.square(rows))

    def magnitude(self, rows: np.ndarray) -> np.ndarray:
        return np.sqrt(self.energy(rows))

    def field(self, f: np.ndarray) -> np.ndarray:
        return self.magnitude(self.apply(f))

    def stacked(self, other: "GammaOperator") -> "GammaOperator":
        return GammaOperator(
            matrix=sparse.vstack([self.matrix, other.matrix]).tocsr(),
            owner=np.concatenate([self.owner, other.owner]),
            n_vertices=self.n_vertices,
            channel=GammaChannel.BOTH,
        )


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """
    Коэффициенты дивергентного оператора −div(A∇) на рёбрах сетки

    Атрибуты:
    edge_coefficients (np.ndarray): Симметричный коэффициент a_uv для каждого ребра;
    ellipticity (float): Константа эллиптичности ν, a_uv ≥ ν > 0
    """

    edge_coefficients: np.ndarray
    ellipticity: float

    def __post_init__(self) -> None:
        coefficients: np.ndarray = _frozen(self.edge_coefficients, np.float64)
        if not self.ellipticity > 0:
            raise InvalidArgumentError("ellipticity constant must be positive")
        if np.any(coefficients < self.ellipticity * (1.0 - 1e-12)):
            raise InvalidArgumentError("edge coefficient below the ellipticity constant")
        object.__setattr__(self, "edge_coefficients", coefficients)


@dataclass(frozen=True, eq=False)
class OperatorBundle:
    """
    Оператор L = Δ_G + V (или −div(A∇)) вместе с потенциалом и оператором Γ.
    Функции на вершинах задаются только на активных (не граничных) вершинах

    Атрибуты:
    graph (WeightedGraph): Исходный граф;
    potential (np.ndarray): Неотрицательный потенциал на активных вершинах;
    active (np.ndarray): Индексы активных вершин в графе;
    measure (np.ndarray): Мера активных вершин;
    stiffness (sparse.csr_matrix): Матрица формы Дирихле K, ⟨Kf, f⟩ = Σ w (Δf)²;
    matrix_L (sparse.csr_matrix): Матрица L = M⁻¹K + diag(V);
    gradient (GammaOperator): Реализация ∇ (carré du champ);
    form (OperatorForm): Вид оператора;
    coefficients (Optional[CoefficientField]): Коэффициенты дивергентной формы
    """

    graph: WeightedGraph
    potential: np.ndarray
    active: np.ndarray
    measure: np.ndarray
    stiffness: sparse.csr_matrix
    matrix_L: sparse.csr_matrix
    gradient: GammaOperator
    form: OperatorForm = OperatorForm.SCHRODINGER
    coefficients: Optional[CoefficientField] = None

    @property
    def n(self) -> int:
        return int(self.active.size)

    @property
    def positions(self) -> Optional[np.ndarray]:
        if self.graph.positions is None:
            return None
        return self.graph.positions[self.active]

    @cached_property
    def potential_operator(self) -> GammaOperator:
        return GammaOperator(
            matrix=sparse.diags(np.sqrt(self.potential)).tocsr(),
            owner=np.arange(self.n),
            n_vertices=self.n,
            channel=GammaChannel.POTENTIAL,
        )

    @cached_property
    def combined_operator(self) -> GammaOperator:
        return self.gradient.stacked(self.potential_operator)

    def gamma(self, channel: GammaChannel) -> GammaOperator:
        if channel is GammaChannel.GRADIENT:
            return self.gradient
        if channel is GammaChannel.POTENTIAL:
            return self.potential_operator
        return self.combined_operator

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix_L @ f

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(self.measure * f * g))

    def quadratic_form(self, f: np.ndarray) -> float:
        return float(f @ (self.stiffness @ f) + np.sum(self.measure * self.potential * f * f))

    def dense_matrix(self) -> np.ndarray:
        return self.matrix_L.toarray()


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Спектральное разложение L, ортонормированное в скалярном произведении с мерой μ

    Атрибуты:
    eigenvalues (np.ndarray): Неубывающие неотрицательные собственные значения;
    eigenvectors (np.ndarray): Собственные векторы по столбцам;
    measure (np.ndarray): Мера активных вершин;
    kernel_tolerance (float): Порог, ниже которого собственное значение считается нулём
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    measure: np.ndarray
    kernel_tolerance: float

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    @cached_property
    def kernel_mask(self) -> np.ndarray:
        return self.eigenvalues <= self.kernel_tolerance

    @property
    def kernel_dim(self) -> int:
        return int(np.count_nonzero(self.kernel_mask))

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def lambda_min_positive(self) -> float:
        positive: np.ndarray = self.eigenvalues[~self.kernel_mask]
        if positive.size == 0:
            return 1.0
        return float(positive[0])

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        weighted: np.ndarray = f * (self.measure if f.ndim == 1 else self.measure[:, None])
        return self.eigenvectors.T @ weighted

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ coefficients

    def kernel_part(self, f: np.ndarray) -> np.ndarray:
        coefficients: np.ndarray = self.coefficients(f)
        coefficients[~self.kernel_mask] = 0.0
        return self.synthesize(coefficients)

    def project_kernel(self, f: np.ndarray) -> np.ndarray:
        return f - self.kernel_part(f)


class MultiplierKind(str, Enum):
    EXP = "exp"
    ZEXP = "zexp"
    POISSON = "poisson"
    RESOLVENT = "resolvent"
    BUMP = "bump"
    TABULATED = "tabulated"
    CONSTANT = "constant"
    POWER = "power"
    CUSTOM = "custom"


BUMP_SUPPORT: Tuple[float, float] = (0.5, 2.0)


@dataclass(frozen=True, eq=False)
class MultiplierFunction:
    """
    Спектральный мультипликатор m(z), вычисляемый на [0, λ_max]. Сектор голоморфности
    здесь не нужен: спектр L вещественный и неотрицательный

    Атрибуты:
    kind (MultiplierKind): Вид функции;
    scale (float): Растяжение аргумента, вычисляется m(scale·z);
    delta_prime (Optional[float]): Показатель резольвентной степени (1+z)^{−δ′};
    exponent (Optional[float]): Показатель степенной функции z^a;
    constant (float): Значение постоянного мультипликатора;
    grid (Optional[np.ndarray]): Узлы таблицы;
    values (Optional[np.ndarray]): Значения в узлах таблицы;
    rule (str): Правило интерполяции таблицы (linear или cubic);
    function (Optional[Callable]): Векторизованная функция для вида custom;
    name (Optional[str]): Имя для вида custom
    """

    kind: MultiplierKind
    scale: float = 1.0
    delta_prime: Optional[float] = None
    exponent: Optional[float] = None
    constant: float = 1.0
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    rule: str = "linear"
    function: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: Optional[str] = None

    @classmethod
    def heat(cls) -> "MultiplierFunction":
        return cls(kind=MultiplierKind.EXP)

    @classmethod
    def zheat(cls) -> "MultiplierFunction":
        return cls(kind=MultiplierKind.ZEXP)

    @classmethod
    def poisson(cls) -> "MultiplierFunction":
        return cls(kind=MultiplierKind.POISSON)

    @classmethod
    def resolvent(
        cls, delta_prime: float, override: bool = False
    ) -> "MultiplierFunction":
        if delta_prime <= 0.5 and not override:
            raise InvalidArgumentError(
                f"delta_prime must exceed 1/2, got {delta_prime}; pass override to explore"
            )
        if delta_prime <= 0:
            raise InvalidArgumentError("delta_prime must be positive")
        return cls(kind=MultiplierKind.RESOLVENT, delta_prime=float(delta_prime))

    @classmethod
    def bump(cls) -> "MultiplierFunction":
        return cls(kind=MultiplierKind.BUMP)

    @classmethod
    def tabulated(
        cls, grid: np.ndarray, values: np.ndarray, rule: str = "linear"
    ) -> "MultiplierFunction":
        grid = _frozen(grid, np.float64)
        values = _frozen(values, np.float64)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise InvalidArgumentError("tabulation needs matching 1-D grid and values")
        if not np.all(np.diff(grid) > 0):
            raise InvalidArgumentError("tabulation grid must be strictly increasing")
        if rule not in ("linear", "cubic"):
            raise InvalidArgumentError(f"unknown interpolation rule {rule!r}")
        return cls(kind=MultiplierKind.TABULATED, grid=grid, values=values, rule=rule)

    @classmethod
    def constant_function(cls, constant: float = 1.0) -> "MultiplierFunction":
        return cls(kind=MultiplierKind.CONSTANT, constant=float(constant))

    @classmethod
    def power(cls, exponent: float) -> "MultiplierFunction":
        return cls(kind=MultiplierKind.POWER, exponent=float(exponent))

    @classmethod
    def custom(
        cls, name: str, function: Callable[[np.ndarray], np.ndarray]
    ) -> "MultiplierFunction":
        return cls(kind=MultiplierKind.CUSTOM, function=function, name=name)

    @property
    def label(self) -> str:
        base: str = self.name if self.kind is MultiplierKind.CUSTOM else self.kind.value
        if self.kind is MultiplierKind.RESOLVENT:
            base = f"{base}({self.delta_prime:g})"
        if self.kind is MultiplierKind.POWER:
            base = f"{base}({self.exponent:g})"
        if self.scale != 1.0:
            base = f"{base}[x{self.scale:g}]"
        return base

    @property
    def is_exponential_type(self) -> bool:
        return self.kind in (MultiplierKind.EXP, MultiplierKind.ZEXP)

    @property
    def exponential_power(self) -> int:
        return 1 if self.kind is MultiplierKind.ZEXP else 0

    @property
    def singular_at_zero(self) -> bool:
        return self.kind is MultiplierKind.POWER and self.exponent < 0

    def dilate(self, factor: float) -> "MultiplierFunction":
        return MultiplierFunction(
            kind=self.kind,
            scale=self.scale * float(factor),
            delta_prime=self.delta_prime,
            exponent=self.exponent,
            constant=self.constant,
            grid=self.grid,
            values=self.values,
            rule=self.rule,
            function=self.function,
            name=self.name,
        )

    def __mul__(self, other: "MultiplierFunction") -> "MultiplierFunction":
        return MultiplierFunction.custom(
            name=f"{self.label}*{other.label}",
            function=lambda z: self(z) * other(z),
        )

    def __call__(self, z) -> np.ndarray:
        argument: np.ndarray = self.scale * np.asarray(z, dtype=np.float64)

        if self.kind is MultiplierKind.EXP:
            return np.exp(-argument)
        if self.kind is MultiplierKind.ZEXP:
            return argument * np.exp(-argument)
        if self.kind is MultiplierKind.POISSON:
            return np.exp(-np.sqrt(np.maximum(argument, 0.0)))
        if self.kind is MultiplierKind.RESOLVENT:
            return np.power(1.0 + argument, -self.delta_prime)
        if self.kind is MultiplierKind.BUMP:
            return _smooth_bump(argument)
        if self.kind is MultiplierKind.TABULATED:
            return self._interpolate(argument)
        if self.kind is MultiplierKind.CONSTANT:
            return np.full_like(argument, self.constant)
        if self.kind is MultiplierKind.POWER:
            with np.errstate(divide="ignore"):
                return np.power(argument, self.exponent)
        return np.asarray(self.function(argument), dtype=np.float64)

    def _interpolate(self, argument: np.ndarray) -> np.ndarray:
        inside: np.ndarray = (argument >= self.grid[0]) & (argument <= self.grid[-1])
        if self.rule == "linear":
            result: np.ndarray = np.interp(argument, self.grid, self.values)
        else:
            result = interpolate.CubicSpline(self.grid, self.values)(argument)
        return np.where(inside, result, 0.0)

    def tail_length(self, t_max: float, rate: float) -> float:
        """
        Длина τ, для которой ∫_{t_max}^∞ |F(tλ)|² dt ≈ |F(t_max λ)|²·τ при λ ≥ rate
        """

        a: float = self.scale * rate
        if self.kind is MultiplierKind.EXP:
            return 1.0 / (2.0 * a)
        if self.kind is MultiplierKind.ZEXP:
            return (1.0 + 1.0 / (a * t_max) + 0.5 / (a * t_max) ** 2) / (2.0 * a)
        if self.kind is MultiplierKind.POISSON:
            return np.sqrt(t_max / a) + 1.0 / (2.0 * a)
        if self.kind is MultiplierKind.RESOLVENT:
            if self.delta_prime <= 0.5:
                return np.inf
            return (1.0 + a * t_max) / (a * (2.0 * self.delta_prime - 1.0))
        if self.kind is MultiplierKind.CONSTANT:
            return np.inf
        if self.kind is MultiplierKind.POWER:
            if 2.0 * self.exponent < -1.0:
                return t_max / (-2.0 * self.exponent - 1.0)
            return np.inf
        return 0.0


def _smooth_bump(argument: np.ndarray) -> np.ndarray:
    low, high = BUMP_SUPPORT
    centre: float = 0.5 * (low + high)
    half_width: float = 0.5 * (high - low)
    s: np.ndarray = (argument - centre) / half_width
    inside: np.ndarray = np.abs(s) < 1.0
    safe: np.ndarray = np.where(inside, s, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe * safe)), 0.0)


class FunctionalKind(str, Enum):
    H = "H"
    H_F = "H_F"
    G = "G"
    H_LOC = "H_loc"
    H_INF = "H_inf"
    Q = "Q"

    @property
    def interval(self) -> Tuple[float, float]:
        if self in (FunctionalKind.H_LOC, FunctionalKind.Q):
            return 0.0, 1.0
        if self is FunctionalKind.H_INF:
            return 1.0, np.inf
        return 0.0, np.inf


class CombineRule(str, Enum):
    SUM = "sum"
    RSS = "rss"


@dataclass(frozen=True, eq=False)
class FunctionalSpec:
    """
    Описание функционала Литтлвуда-Пэли-Стейна

    Атрибуты:
    kind (FunctionalKind): Вид функционала и его интервал по t;
    channel (GammaChannel): Каналы Γ, входящие в функционал;
    multipliers (Tuple[MultiplierFunction, ...]): Мультипликаторы m_k;
    outer (MultiplierFunction): Внешняя функция F (для H_F; для остальных видов e^{−z});
    combine (CombineRule): Сумма двух функционалов или корень из суммы квадратов
    """

    kind: FunctionalKind = FunctionalKind.H
    channel: GammaChannel = GammaChannel.BOTH
    multipliers: Tuple[MultiplierFunction, ...] = field(
        default_factory=lambda: (MultiplierFunction.constant_function(1.0),)
    )
    outer: MultiplierFunction = field(default_factory=MultiplierFunction.heat)
    combine: CombineRule = CombineRule.SUM

    def __post_init__(self) -> None:
        object.__setattr__(self, "multipliers", tuple(self.multipliers))
        if not self.multipliers:
            raise InvalidArgumentError("at least one multiplier is required")
        if self.kind in (
            FunctionalKind.H,
            FunctionalKind.H_LOC,
            FunctionalKind.H_INF,
            FunctionalKind.Q,
        ) and not (self.outer.kind is MultiplierKind.EXP and self.outer.scale == 1.0):
            raise InvalidArgumentError(
                f"kind {self.kind.value} uses the heat semigroup; outer F applies to H_F only"
            )

    @property
    def k(self) -> int:
        return len(self.multipliers)

    @property
    def label(self) -> str:
        return f"{self.kind.value}[{self.channel.value},{self.combine.value}]"


def simpson_coefficients(intervals: int) -> np.ndarray:
    coefficients: np.ndarray = np.ones(intervals + 1)
    coefficients[1:-1:2] = 4.0
    coefficients[2:-1:2] = 2.0
    return coefficients


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """
    Равномерная по log t сетка, содержащая узел t = 1; составная формула Симпсона
    на каждой из частей (0, 1] и [1, ∞)

    Атрибуты:
    log_step (float): Шаг по log t;
    left_intervals (int): Чётное число интервалов на [t_min, 1];
    right_intervals (int): Чётное число интервалов на [1, t_max];
    tail_rate (float): λ_min⁺, скорость убывания хвоста за t_max
    """

    log_step: float
    left_intervals: int
    right_intervals: int
    tail_rate: float

    def __post_init__(self) -> None:
        if self.left_intervals < 2 or self.left_intervals % 2:
            raise InvalidArgumentError("left interval count must be even and >= 2")
        if self.right_intervals < 2 or self.right_intervals % 2:
            raise InvalidArgumentError("right interval count must be even and >= 2")
        if not self.log_step > 0 or not self.tail_rate > 0:
            raise InvalidArgumentError("log step and tail rate must be positive")

    @cached_property
    def nodes(self) -> np.ndarray:
        exponents: np.ndarray = np.arange(-self.left_intervals, self.right_intervals + 1)
        nodes: np.ndarray = np.exp(self.log_step * exponents)
        nodes[self.left_intervals] = 1.0
        return nodes

    @property
    def t_min(self) -> float:
        return float(self.nodes[0])

    @property
    def t_max(self) -> float:
        return float(self.nodes[-1])

    def quadrature(self, lower: float, upper: float) -> Tuple[np.ndarray, np.ndarray]:
        """Узлы и веса (с якобианом t) для интервала (0, 1], [1, ∞) или (0, ∞)"""

        coefficients: np.ndarray = np.zeros(self.nodes.size)
        split: int = self.left_intervals
        if lower == 0.0:
            coefficients[: split + 1] += simpson_coefficients(self.left_intervals)
        if upper == np.inf:
            coefficients[split:] += simpson_coefficients(self.right_intervals)
        if lower not in (0.0, 1.0) or upper not in (1.0, np.inf) or lower >= upper:
            raise InvalidArgumentError(f"unsupported time interval ({lower}, {upper})")

        start: int = 0 if lower == 0.0 else split
        stop: int = split + 1 if upper == 1.0 else self.nodes.size
        nodes: np.ndarray = self.nodes[start:stop]
        weights: np.ndarray = coefficients[start:stop] * self.log_step / 3.0 * nodes
        return nodes, weights

    def refined(self) -> "TimeGrid":
        return TimeGrid(
            log_step=self.log_step / 2.0,
            left_intervals=2 * self.left_intervals,
            right_intervals=2 * self.right_intervals,
            tail_rate=self.tail_rate,
        )


class RieszKind(str, Enum):
    """Полное ΓL^{−1/2}, локальное Γ(L+I)^{−1/2} и на бесконечности ΓL^{−1/2}e^{−L}"""

    FULL = "full"
    LOCAL = "local"
    INFINITY = "infinity"


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """
    Семейство операторов {T_t}. Член семейства действует спектрально (symbol(t, λ))
    и затем через Γ; без разложения это кратное тождества

    Атрибуты:
    label (str): Имя семейства;
    parameter_domain (Tuple[float, float]): Допустимые t, low < t ≤ high;
    measure (np.ndarray): Мера активных вершин;
    gamma (Optional[GammaOperator]): Оператор Γ (None, если значения являются функциями вершин);
    decomposition (Optional[SpectralDecomposition]): Спектральное разложение L;
    symbol (Optional[Callable]): Множитель (t, λ) -> значение на собственных модах;
    resonance (Optional[Callable]): Для собственного значения λ даёт t, на котором
    |symbol(t, λ)| максимален;
    scale (float): Множитель тождественного семейства
    """

    label: str
    parameter_domain: Tuple[float, float]
    measure: np.ndarray
    gamma: Optional[GammaOperator] = None
    decomposition: Optional[SpectralDecomposition] = None
    symbol: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    resonance: Optional[Callable[[float], float]] = None
    scale: float = 1.0

    @property
    def n(self) -> int:
        return int(self.measure.size)

    def contains(self, t: float) -> bool:
        low, high = self.parameter_domain
        return low < t <= high

    def apply(self, t: float, f: np.ndarray) -> np.ndarray:
        if not self.contains(t):
            raise InvalidArgumentError(
                f"t={t} outside the parameter domain {self.parameter_domain} of {self.label}"
            )
        if self.decomposition is None:
            return self.scale * f
        dec: SpectralDecomposition = self.decomposition
        factors: np.ndarray = self.symbol(t, dec.eigenvalues)
        coefficients: np.ndarray = dec.coefficients(f)
        if coefficients.ndim == 2:
            factors = factors[:, None]
        spectral: np.ndarray = dec.synthesize(factors * coefficients)
        if self.gamma is None:
            return self.scale * spectral
        return self.scale * self.gamma.apply(spectral)

    def member(self, t: float) -> Callable[[np.ndarray], np.ndarray]:
        return lambda f: self.apply(t=t, f=f)

    def energy(self, rows: np.ndarray) -> np.ndarray:
        if self.gamma is None:
            return np.square(rows)
        return self.gamma.energy(rows)

    def magnitude(self, rows: np.ndarray) -> np.ndarray:
        return np.sqrt(self.energy(rows))

    @cached_property
    def spectral_gram(self) -> np.ndarray:
        """C_jl = ⟨Γφ_j, Γφ_l⟩ в L²(μ), так что ‖Γ Σ a_j φ_j‖₂² = aᵀCa"""

        if self.decomposition is None:
            return np.eye(self.n)
        basis: np.ndarray = self.decomposition.eigenvectors
        if self.gamma is None:
            return basis.T @ (self.measure[:, None] * basis)
        rows: np.ndarray = np.asarray(self.gamma.apply(basis))
        owner_measure: np.ndarray = self.measure[self.gamma.owner]
        return rows.T @ (owner_measure[:, None] * rows)

    def exact_norm(self, t: float) -> float:
        """Точная норма ‖T_t‖ в L²(μ)"""

        if self.decomposition is None:
            return abs(self.scale)
        factors: np.ndarray = self.symbol(t, self.decomposition.eigenvalues)
        weighted: np.ndarray = factors[:, None] * self.spectral_gram * factors[None, :]
        top: float = float(np.linalg.eigvalsh(0.5 * (weighted + weighted.T))[-1])
        return abs(self.scale) * float(np.sqrt(max(top, 0.0)))
