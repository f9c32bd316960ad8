import logging
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np
from scipy import special

from src.errors import DegenerateInputError
from src.errors import DivergenceError
from src.errors import InvalidArgumentError
from src.errors import KernelCollisionError
from src.errors import ResourceLimitError
from src.errors import UnsupportedError
from src.models.models import CombineRule
from src.models.models import FunctionalKind
from src.models.models import FunctionalSpec
from src.models.models import GammaChannel
from src.models.models import GammaOperator
from src.models.models import MultiplierFunction
from src.models.models import MultiplierKind
from src.models.models import OperatorBundle
from src.models.models import SpectralDecomposition
from src.models.models import TimeGrid
from src.models.models import WeightedGraph
from src.schemas.schemas import FunctionalNormReport
from src.services.hashing import array_digest
from src.services.probes import ProbeBattery
from src.services.probes import SearchOutcome
from src.services.probes import TupleProbeBattery
from src.services.probes import search
from src.services.spectral import apply_values
from src.services.spectral import decompose
from src.settings import numeric_defaults

logger = logging.getLogger(__name__)

Space = Union[OperatorBundle, SpectralDecomposition, WeightedGraph, np.ndarray]
FunctionList = Union[np.ndarray, Sequence[np.ndarray]]

NODE_BLOCK: int = 64
KERNEL_GAMMA_TOLERANCE: float = 1e-9
SEMIGROUP_KINDS: Tuple[FunctionalKind, ...] = (
    FunctionalKind.H,
    FunctionalKind.H_LOC,
    FunctionalKind.H_INF,
    FunctionalKind.Q,
)


def measure_of(space: Space) -> np.ndarray:
    if isinstance(space, (OperatorBundle, SpectralDecomposition, WeightedGraph)):
        return space.measure
    return np.asarray(space, dtype=np.float64)


def lp_norm(space: Space, f: np.ndarray, p: float) -> float:
    """(Σₓ μ(x)|f(x)|^p)^{1/p}; p = inf даёт max|f|"""

    measure: np.ndarray = measure_of(space)
    values: np.ndarray = np.abs(np.asarray(f, dtype=np.float64))
    if values.shape != measure.shape:
        raise InvalidArgumentError(
            f"function of shape {values.shape} does not match {measure.size} vertices"
        )
    if p == np.inf:
        return float(np.max(values)) if values.size else 0.0
    if not p >= 1 or not np.isfinite(p):
        raise InvalidArgumentError(f"exponent must be in [1, inf], got {p}")
    peak: float = float(np.max(values)) if values.size else 0.0
    if peak == 0.0:
        return 0.0
    # масштабирование на максимум, чтобы |f|^p не переполнялось при больших p
    return peak * float(np.sum(measure * (values / peak) ** p) ** (1.0 / p))


def sequence_rhs_norm(space: Space, f_list: FunctionList, p: float) -> float:
    """‖(Σ_k |f_k|²)^{1/2}‖_p"""

    columns: np.ndarray = as_columns(f_list=f_list, n=measure_of(space).size)
    return lp_norm(space=space, f=np.sqrt(np.sum(columns * columns, axis=1)), p=p)


def as_columns(f_list: FunctionList, n: int, width: Optional[int] = None) -> np.ndarray:
    """Список функций или матрица n×k -> матрица n×k"""

    if isinstance(f_list, np.ndarray):
        columns: np.ndarray = f_list[:, None] if f_list.ndim == 1 else f_list
    else:
        if len(f_list) == 0:
            raise InvalidArgumentError("function list must be nonempty")
        columns = np.column_stack([np.asarray(f, dtype=np.float64) for f in f_list])
    columns = np.asarray(columns, dtype=np.float64)
    if columns.ndim != 2 or columns.shape[0] != n:
        raise InvalidArgumentError(f"functions must live on {n} active vertices")
    if width is not None and columns.shape[1] != width:
        raise InvalidArgumentError(
            f"{columns.shape[1]} functions given for {width} multipliers"
        )
    return columns


def build_time_grid(
    dec: SpectralDecomposition,
    nodes: int = numeric_defaults.TIME_NODES,
    t_min_factor: float = numeric_defaults.T_MIN_FACTOR,
    t_max_factor: float = numeric_defaults.T_MAX_FACTOR,
) -> TimeGrid:
    """
    Логарифмическая сетка от min(t_min_factor/λ_max, 1/2) до max(t_max_factor/λ_min⁺, 2),
    около nodes интервалов, с узлом t = 1
    """

    if nodes < 4:
        raise InvalidArgumentError(f"time grid needs at least 4 intervals, got {nodes}")
    top: float = dec.lambda_max if dec.lambda_max > 0 else 1.0
    rate: float = dec.lambda_min_positive
    t_min: float = min(t_min_factor / top, 0.5)
    t_max: float = max(t_max_factor / rate, 2.0)
    log_step: float = (np.log(t_max) - np.log(t_min)) / nodes
    left: int = _even_ceiling(-np.log(t_min) / log_step)
    right: int = _even_ceiling(np.log(t_max) / log_step)
    return TimeGrid(log_step=log_step, left_intervals=left, right_intervals=right, tail_rate=rate)


def _even_ceiling(value: float) -> int:
    count: int = max(int(np.ceil(value - 1e-9)), 2)
    return count + count % 2


class FunctionalEvaluator:
    """
    Вычисление функционала spec в каждой вершине. Время входит только через
    спектральные множители, поэтому для блока узлов t строится матрица коэффициентов
    (моды × узлы), синтезируется и пропускается через разреженный Γ
    """

    def __init__(
        self,
        bundle: OperatorBundle,
        dec: SpectralDecomposition,
        spec: FunctionalSpec,
        grid: Optional[TimeGrid] = None,
    ) -> None:
        if dec.n != bundle.n:
            raise InvalidArgumentError("decomposition does not belong to this bundle")
        self.bundle: OperatorBundle = bundle
        self.dec: SpectralDecomposition = dec
        self.spec: FunctionalSpec = spec
        self.grid: TimeGrid = grid if grid is not None else build_time_grid(dec=dec)
        self.lower, self.upper = spec.kind.interval
        self.static: List[np.ndarray] = [self._static_values(m) for m in spec.multipliers]

    @property
    def channels(self) -> Tuple[GammaChannel, ...]:
        if self.spec.channel is GammaChannel.BOTH:
            return GammaChannel.GRADIENT, GammaChannel.POTENTIAL
        return (self.spec.channel,)

    def _static_values(self, m: MultiplierFunction) -> np.ndarray:
        """m_k(λ_j) для видов, где m_k не растягивается по t (все, кроме G)"""

        if self.spec.kind is FunctionalKind.G:
            return np.ones(self.dec.n)
        values: np.ndarray = np.asarray(m(self.dec.eigenvalues), dtype=np.float64)
        if np.any(~np.isfinite(values) & ~self.dec.kernel_mask):
            raise InvalidArgumentError(f"multiplier {m.label} is not finite on the spectrum")
        return values

    def time_factors(self, k: int, t: np.ndarray) -> np.ndarray:
        """Множители мод (моды × узлы) для k-го члена"""

        lam: np.ndarray = self.dec.eigenvalues[:, None]
        tt: np.ndarray = np.asarray(t, dtype=np.float64)[None, :]
        if self.spec.kind is FunctionalKind.G:
            return np.asarray(self.spec.multipliers[k](lam * tt), dtype=np.float64)
        static: np.ndarray = self.static[k][:, None]
        if self.spec.kind is FunctionalKind.H_F:
            return static * np.asarray(self.spec.outer(lam * tt), dtype=np.float64)
        return static * np.exp(-lam * tt)

    def coefficients(self, columns: np.ndarray) -> np.ndarray:
        """
        Коэффициенты f_k в собственном базисе. Моды ядра Γ не видит; на бесконечном
        интервале они отбрасываются после проверки, что Γ их действительно гасит
        """

        coefficients: np.ndarray = self.dec.coefficients(columns)
        kernel: np.ndarray = self.dec.kernel_mask
        if not np.any(kernel):
            return coefficients

        kernel_part: np.ndarray = coefficients * kernel[:, None]
        if np.any(kernel_part != 0.0):
            residue: np.ndarray = self.bundle.combined_operator.apply(
                self.dec.synthesize(kernel_part)
            )
            scale: float = max(1.0, float(np.max(np.abs(columns))))
            if float(np.max(np.abs(residue))) > KERNEL_GAMMA_TOLERANCE * scale:
                if self.upper == np.inf:
                    raise DivergenceError(
                        "Γ does not annihilate the kernel component; the t-integral diverges"
                    )
                return coefficients
        if self.upper == np.inf:
            return coefficients * ~kernel[:, None]
        for k, values in enumerate(self.static):
            if np.any(~np.isfinite(values[kernel]) & (coefficients[kernel, k] != 0.0)):
                raise KernelCollisionError(
                    f"multiplier {self.spec.multipliers[k].label} is undefined on ker L"
                )
        return coefficients

    def _node_energy(
        self, gamma: GammaOperator, k: int, coefficients: np.ndarray, t: np.ndarray
    ) -> np.ndarray:
        """|Γ u_k(t)|²(x) для всех узлов t, матрица вершины × узлы"""

        factors: np.ndarray = self.time_factors(k=k, t=t)
        factors = np.where(np.isfinite(factors), factors, 0.0)
        spectral: np.ndarray = self.dec.synthesize(coefficients[:, None] * factors)
        return gamma.energy(gamma.apply(spectral))

    def _tail_length(self, k: int) -> float:
        t_max: float = self.grid.t_max
        rate: float = self.grid.tail_rate
        if self.spec.kind is FunctionalKind.G:
            return float(self.spec.multipliers[k].tail_length(t_max=t_max, rate=rate))
        if self.spec.kind is FunctionalKind.H_F:
            return float(self.spec.outer.tail_length(t_max=t_max, rate=rate))
        return float(MultiplierFunction.heat().tail_length(t_max=t_max, rate=rate))

    def quadrature_energy(self, gamma: GammaOperator, coefficients: np.ndarray) -> np.ndarray:
        """Σ_k ∫_I |Γ u_k(t)|²(x) dt по формуле Симпсона с поправками на концах"""

        nodes, weights = self.grid.quadrature(lower=self.lower, upper=self.upper)
        total: np.ndarray = np.zeros(self.bundle.n)
        for k in range(coefficients.shape[1]):
            column: np.ndarray = coefficients[:, k]
            for start in range(0, nodes.size, NODE_BLOCK):
                block: slice = slice(start, start + NODE_BLOCK)
                total += self._node_energy(gamma, k, column, nodes[block]) @ weights[block]

            if self.lower == 0.0:
                head: np.ndarray = self._node_energy(gamma, k, column, nodes[:1])[:, 0]
                total += nodes[0] * head
            if self.upper == np.inf:
                tail: np.ndarray = self._node_energy(gamma, k, column, nodes[-1:])[:, 0]
                length: float = self._tail_length(k=k)
                if np.isinf(length):
                    if float(np.max(tail)) > 1e-14 * max(float(np.max(total)), 1e-300):
                        raise DivergenceError(
                            f"{self.spec.kind.value} integrand does not decay in t; "
                            "the functional is infinite"
                        )
                else:
                    total += length * tail
        return total

    def gram_matrix(self, lam: np.ndarray) -> np.ndarray:
        """E_jl = ∫_I T_j(t)T_l(t) dt для T(t) = (sλ t)^m e^{−sλt}"""

        power: int = 0
        scale: float = 1.0
        if self.spec.kind is FunctionalKind.H_F:
            outer: MultiplierFunction = self.spec.outer
            power, scale = outer.exponential_power, outer.scale
        scaled: np.ndarray = scale * lam
        rate: np.ndarray = scaled[:, None] + scaled[None, :]
        prefactor: np.ndarray = np.outer(scaled, scaled) ** power
        return prefactor * _power_exponential_integral(
            q=2 * power, rate=rate, lower=self.lower, upper=self.upper
        )

    def gram_energy(self, gamma: GammaOperator, coefficients: np.ndarray) -> np.ndarray:
        total: np.ndarray = np.zeros(self.bundle.n)
        for k in range(coefficients.shape[1]):
            weighted: np.ndarray = coefficients[:, k] * np.where(
                np.isfinite(self.static[k]), self.static[k], 0.0
            )
            index: np.ndarray = np.flatnonzero(weighted != 0.0)
            if index.size == 0:
                continue
            gram: np.ndarray = self.gram_matrix(lam=self.dec.eigenvalues[index])
            images: np.ndarray = np.asarray(
                gamma.apply(self.dec.eigenvectors[:, index] * weighted[index])
            )
            row_energy: np.ndarray = np.sum((images @ gram) * images, axis=1)
            total += np.asarray(gamma.aggregator @ row_energy)
        return total

    def semigroup_term(self, columns: np.ndarray) -> np.ndarray:
        """(Σ_k |e^{−L} m_k(L) f_k|²)^{1/2}, слагаемое функционала Q"""

        squares: np.ndarray = np.zeros(self.bundle.n)
        for k, m in enumerate(self.spec.multipliers):
            values: np.ndarray = m(self.dec.eigenvalues) * np.exp(-self.dec.eigenvalues)
            image: np.ndarray = apply_values(dec=self.dec, values=values, f=columns[:, k])
            squares += image * image
        return np.sqrt(squares)

    def channel_energies(self, columns: np.ndarray, method: str) -> Dict[GammaChannel, np.ndarray]:
        if method not in ("quadrature", "gram"):
            raise InvalidArgumentError(f"unknown evaluation method {method!r}")
        coefficients: np.ndarray = self.coefficients(columns=columns)
        energies: Dict[GammaChannel, np.ndarray] = {}
        for channel in self.channels:
            gamma: GammaOperator = self.bundle.gamma(channel)
            if channel is GammaChannel.POTENTIAL and not np.any(self.bundle.potential):
                energies[channel] = np.zeros(self.bundle.n)
            elif method == "gram":
                energies[channel] = self.gram_energy(gamma=gamma, coefficients=coefficients)
            else:
                energies[channel] = self.quadrature_energy(gamma=gamma, coefficients=coefficients)
        return energies

    def combine(
        self, energies: Dict[GammaChannel, np.ndarray], combine: Optional[CombineRule] = None
    ) -> np.ndarray:
        rule: CombineRule = combine or self.spec.combine
        parts: List[np.ndarray] = [np.maximum(energy, 0.0) for energy in energies.values()]
        if rule is CombineRule.RSS:
            return np.sqrt(np.sum(parts, axis=0))
        return np.sum([np.sqrt(part) for part in parts], axis=0)

    def evaluate(
        self,
        f_list: FunctionList,
        method: str = "quadrature",
        combine: Optional[CombineRule] = None,
    ) -> np.ndarray:
        columns: np.ndarray = as_columns(f_list=f_list, n=self.bundle.n, width=self.spec.k)
        values: np.ndarray = self.combine(self.channel_energies(columns, method), combine)
        if self.spec.kind is FunctionalKind.Q:
            values = values + self.semigroup_term(columns=columns)
        return values


def _power_exponential_integral(
    q: int, rate: np.ndarray, lower: float, upper: float
) -> np.ndarray:
    """∫_lower^upper t^q e^{−rate·t} dt поэлементно"""

    rate = np.asarray(rate, dtype=np.float64)
    positive: np.ndarray = rate > 0
    safe: np.ndarray = np.where(positive, rate, 1.0)
    scale: np.ndarray = special.gamma(q + 1) / safe ** (q + 1)
    if upper == np.inf:
        mass: np.ndarray = special.gammaincc(q + 1, safe * lower)
    else:
        mass = special.gammainc(q + 1, safe * upper) - special.gammainc(q + 1, safe * lower)
    if upper == np.inf:
        at_zero: float = np.inf
    else:
        at_zero = (upper ** (q + 1) - lower ** (q + 1)) / (q + 1)
    return np.where(positive, scale * mass, at_zero)


def lps_quadrature(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    spec: FunctionalSpec,
    f_list: FunctionList,
    grid: Optional[TimeGrid] = None,
) -> np.ndarray:
    evaluator: FunctionalEvaluator = FunctionalEvaluator(bundle=bundle, dec=dec, spec=spec, grid=grid)
    return evaluator.evaluate(f_list=f_list, method="quadrature")


def lps_exact_gram(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    spec: FunctionalSpec,
    f_list: FunctionList,
    cap: int = numeric_defaults.ORACLE_CAP,
) -> np.ndarray:
    """
    Точное значение интеграла по t через суммы Грама по собственным модам.
    Только для e^{−tL} и F(z) = z^m e^{−z} (m ∈ {0, 1}) и не более cap вершин
    """

    if bundle.n > cap:
        raise ResourceLimitError(
            f"{bundle.n} active vertices exceed the oracle cap {cap}", cap=cap
        )
    if spec.kind is FunctionalKind.G:
        raise UnsupportedError("the Gram oracle covers semigroup kinds only, not G")
    if spec.kind is FunctionalKind.H_F and spec.outer.kind not in (
        MultiplierKind.EXP,
        MultiplierKind.ZEXP,
    ):
        raise UnsupportedError(f"the Gram oracle needs an exponential outer F, got {spec.outer.label}")
    evaluator: FunctionalEvaluator = FunctionalEvaluator(bundle=bundle, dec=dec, spec=spec)
    return evaluator.evaluate(f_list=f_list, method="gram")


def norm_curve_integral(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    f: np.ndarray,
    p: float,
    channel: GammaChannel = GammaChannel.BOTH,
    grid: Optional[TimeGrid] = None,
) -> float:
    """
    ∫₀^∞ ‖Γ e^{−tL} f‖_p² dt; для обоих каналов берётся сумма двух интегралов.
    f проецируется на ортогональное дополнение ядра
    """

    grid = grid if grid is not None else build_time_grid(dec=dec)
    coefficients: np.ndarray = dec.coefficients(np.asarray(f, dtype=np.float64))
    coefficients = np.where(dec.kernel_mask, 0.0, coefficients)
    channels: Tuple[GammaChannel, ...] = (
        (GammaChannel.GRADIENT, GammaChannel.POTENTIAL)
        if channel is GammaChannel.BOTH
        else (channel,)
    )
    nodes, weights = grid.quadrature(lower=0.0, upper=np.inf)
    tail_length: float = 1.0 / (2.0 * grid.tail_rate)

    total: float = 0.0
    for part in channels:
        if part is GammaChannel.POTENTIAL and not np.any(bundle.potential):
            continue
        gamma: GammaOperator = bundle.gamma(part)
        curve: np.ndarray = np.empty(nodes.size)
        for start in range(0, nodes.size, NODE_BLOCK):
            block: slice = slice(start, start + NODE_BLOCK)
            spectral: np.ndarray = dec.synthesize(
                coefficients[:, None] * np.exp(-np.outer(dec.eigenvalues, nodes[block]))
            )
            fields: np.ndarray = gamma.magnitude(gamma.apply(spectral))
            curve[block] = [
                lp_norm(space=bundle, f=fields[:, column], p=p) ** 2
                for column in range(fields.shape[1])
            ]
        total += float(curve @ weights) + nodes[0] * curve[0] + tail_length * curve[-1]
    return total


def estimate_functional_norm(
    bundle: OperatorBundle,
    spec: FunctionalSpec,
    p: float,
    budget: int,
    seed: int,
    dec: Optional[SpectralDecomposition] = None,
    grid: Optional[TimeGrid] = None,
    method: str = "quadrature",
) -> FunctionalNormReport:
    """
    Нижняя оценка нормы ‖H‖_{p→p}: максимум ‖H(f)‖_p / ‖(Σ|f_k|²)^{1/2}‖_p по пробам
    и их жадным возмущениям
    """

    if budget < 1:
        raise InvalidArgumentError(f"budget must be at least 1, got {budget}")
    if not p > 1:
        raise InvalidArgumentError(f"p must exceed 1, got {p}")
    dec = dec if dec is not None else decompose(bundle=bundle)
    evaluator: FunctionalEvaluator = FunctionalEvaluator(bundle=bundle, dec=dec, spec=spec, grid=grid)
    battery: ProbeBattery = (
        ProbeBattery(dec=dec, seed=seed)
        if spec.k == 1
        else TupleProbeBattery(dec=dec, seed=seed, width=spec.k)
    )

    def objective(candidate: np.ndarray) -> float:
        denominator: float = sequence_rhs_norm(space=bundle, f_list=candidate, p=p)
        if denominator < 1e-14:
            raise DegenerateInputError("probe has vanishing norm")
        values: np.ndarray = evaluator.evaluate(f_list=candidate, method=method)
        return lp_norm(space=bundle, f=values, p=p) / denominator

    outcome: SearchOutcome = search(battery=battery, budget=budget, objective=objective)
    if outcome.witness is None:
        raise DivergenceError(f"every probe diverged for {spec.label}")

    identity_lhs: Optional[float] = None
    identity_rhs: Optional[float] = None
    if spec.kind is FunctionalKind.H and spec.k == 1 and p == 2.0:
        rss: np.ndarray = evaluator.evaluate(
            f_list=outcome.witness, method=method, combine=CombineRule.RSS
        )
        identity_lhs = lp_norm(space=bundle, f=rss, p=2.0) ** 2
        identity_rhs = 0.5 * lp_norm(
            space=bundle, f=dec.project_kernel(outcome.witness.ravel()), p=2.0
        ) ** 2

    logger.debug(
        "%s at p=%g: constant %.6g after %d probes", spec.label, p, outcome.best_value, budget
    )
    return FunctionalNormReport(
        kind=spec.kind,
        channel=spec.channel,
        combine=spec.combine,
        multipliers=[m.label for m in spec.multipliers],
        p=p,
        budget=budget,
        seed=seed,
        empirical_constant=outcome.best_value,
        witness_digest=array_digest(outcome.witness),
        witness_index=outcome.witness_index,
        probes_evaluated=len(outcome.values),
        probes_skipped=outcome.skipped,
        identity_lhs=identity_lhs,
        identity_rhs=identity_rhs,
        witness=outcome.witness,
    )


def field_rows(bundle: OperatorBundle, values: np.ndarray) -> List[Dict[str, float]]:
    """Строки CSV значений функционала: номер вершины графа, координаты, значение"""

    positions: Optional[np.ndarray] = bundle.positions
    rows: List[Dict[str, float]] = []
    for index, vertex in enumerate(bundle.active):
        row: Dict[str, float] = {"vertex": int(vertex)}
        if positions is not None:
            for axis, coordinate in enumerate(np.atleast_1d(positions[index])):
                row[f"x{axis}"] = float(coordinate)
        row["value"] = float(values[index])
        rows.append(row)
    return rows
