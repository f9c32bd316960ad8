import logging
from dataclasses import dataclass
from dataclasses import field
from typing import Callable
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from src.errors import DegenerateInputError
from src.errors import DivergenceError
from src.errors import InvalidArgumentError
from src.models.models import SpectralDecomposition

logger = logging.getLogger(__name__)

PROBE_KINDS: Tuple[str, ...] = ("gaussian", "indicator", "heat_bump", "eigen_slice")
FLIP_PROBABILITY: float = 0.1
JITTER: float = 0.1

Objective = Callable[[np.ndarray], float]


def probe_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Генератор, зависящий только от (seed, stream, index), но не от порядка вызовов"""

    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream, index)))


class ProbeBattery:
    """
    Общий набор пробных функций: проба 0 постоянна, проба 1 есть первый собственный вектор вне ядра,
    далее по кругу гауссов шум, индикатор вершины, тепловая шапочка e^{−tL}δ_x
    и срез собственного базиса
    """

    def __init__(self, dec: SpectralDecomposition, seed: int, stream: int = 0) -> None:
        self.dec: SpectralDecomposition = dec
        self.seed: int = seed
        self.stream: int = stream

    @property
    def n(self) -> int:
        return self.dec.n

    def kind(self, index: int) -> str:
        if index == 0:
            return "constant"
        if index == 1:
            return "first_mode"
        return PROBE_KINDS[(index - 2) % len(PROBE_KINDS)]

    def probe(self, index: int) -> np.ndarray:
        rng: np.random.Generator = probe_rng(seed=self.seed, stream=self.stream, index=index)
        kind: str = self.kind(index)
        dec: SpectralDecomposition = self.dec
        positive: np.ndarray = np.flatnonzero(~dec.kernel_mask)

        if kind == "constant":
            return np.ones(self.n)
        if kind == "first_mode":
            mode: int = int(positive[0]) if positive.size else 0
            return dec.eigenvectors[:, mode].copy()
        if kind == "gaussian":
            return rng.standard_normal(self.n)
        if kind == "indicator":
            f: np.ndarray = np.zeros(self.n)
            f[rng.integers(self.n)] = 1.0
            return f
        if kind == "heat_bump":
            low: float = 1.0 / max(dec.lambda_max, 1e-300)
            high: float = 1.0 / dec.lambda_min_positive
            t: float = float(np.exp(rng.uniform(np.log(low), np.log(max(high, low)))))
            delta: np.ndarray = np.zeros(self.n)
            delta[rng.integers(self.n)] = 1.0
            coefficients: np.ndarray = dec.coefficients(delta) * np.exp(-t * dec.eigenvalues)
            return dec.synthesize(coefficients)

        pool: np.ndarray = positive if positive.size else np.arange(self.n)
        start: int = int(rng.integers(pool.size))
        width: int = int(rng.integers(1, 5))
        modes: np.ndarray = pool[start : start + width]
        return dec.eigenvectors[:, modes] @ rng.standard_normal(modes.size)

    def probes(self, count: int) -> List[np.ndarray]:
        return [self.probe(index) for index in range(count)]


class TupleProbeBattery(ProbeBattery):
    """Наборы (f_1, ..., f_k) по столбцам: столбец j пробы i совпадает с пробой k·i + j"""

    def __init__(
        self, dec: SpectralDecomposition, seed: int, width: int, stream: int = 0
    ) -> None:
        if width < 1:
            raise InvalidArgumentError(f"tuple width must be at least 1, got {width}")
        super().__init__(dec=dec, seed=seed, stream=stream)
        self.width: int = width

    def probe(self, index: int) -> np.ndarray:
        columns: List[np.ndarray] = [
            super(TupleProbeBattery, self).probe(self.width * index + column)
            for column in range(self.width)
        ]
        return np.column_stack(columns)


def perturb(f: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Шаг жадного подъёма: смена знаков части значений и мультипликативный шум"""

    flips: np.ndarray = np.where(rng.random(f.shape) < FLIP_PROBABILITY, -1.0, 1.0)
    jitter: np.ndarray = np.exp(JITTER * rng.standard_normal(f.shape))
    return f * flips * jitter


@dataclass
class SearchOutcome:
    """
    Итог поиска по пробным функциям

    Атрибуты:
    best_value (float): Наибольшее (или наименьшее) значение цели;
    witness (Optional[np.ndarray]): Функция, на которой оно достигнуто;
    witness_index (int): Номер шага, на котором найдена witness;
    values (List[float]): Значения по всем успешно вычисленным шагам;
    skipped (int): Число шагов, отброшенных из-за расходимости или вырожденности
    """

    best_value: float = -np.inf
    witness: Optional[np.ndarray] = None
    witness_index: int = -1
    values: List[float] = field(default_factory=list)
    skipped: int = 0


def search(
    battery: ProbeBattery,
    budget: int,
    objective: Objective,
    ascent: bool = True,
    maximize: bool = True,
) -> SearchOutcome:
    """
    Чётные шаги берут пробу i/2 из набора, нечётные (при ascent) возмущают лучшую
    найденную функцию. Лучшее значение монотонно по budget при фиксированном seed
    """

    if budget < 1:
        raise InvalidArgumentError(f"budget must be at least 1, got {budget}")

    outcome: SearchOutcome = SearchOutcome(best_value=-np.inf if maximize else np.inf)
    sign: float = 1.0 if maximize else -1.0
    for step in range(budget):
        if ascent and step % 2 == 1 and outcome.witness is not None:
            rng: np.random.Generator = probe_rng(
                seed=battery.seed, stream=battery.stream + 1, index=step
            )
            candidate: np.ndarray = perturb(f=outcome.witness, rng=rng)
        else:
            candidate = battery.probe(step // 2 if ascent else step)

        try:
            value: float = float(objective(candidate))
        except (DivergenceError, DegenerateInputError) as exception:
            outcome.skipped += 1
            logger.debug("probe %d skipped: %s", step, exception)
            continue
        if not np.isfinite(value):
            outcome.skipped += 1
            continue

        outcome.values.append(value)
        if sign * value > sign * outcome.best_value:
            outcome.best_value = value
            outcome.witness = candidate
            outcome.witness_index = step

    if outcome.skipped:
        logger.warning("%d of %d probes skipped", outcome.skipped, budget)
    return outcome
