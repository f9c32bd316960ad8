import itertools
import logging
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from scipy import optimize

from src.errors import DegenerateInputError
from src.errors import InvalidArgumentError
from src.models.models import GammaChannel
from src.models.models import MultiplierFunction
from src.models.models import OperatorBundle
from src.models.models import OperatorFamily
from src.models.models import SpectralDecomposition
from src.schemas.schemas import Formulation
from src.schemas.schemas import RBoundEstimate
from src.schemas.schemas import ratio_histogram
from src.services.functionals import FunctionList
from src.services.functionals import as_columns
from src.services.probes import ProbeBattery
from src.services.probes import probe_rng

logger = logging.getLogger(__name__)

RADEMACHER_STREAM: int = 11
ESTIMATOR_STREAM: int = 12
EXHAUSTIVE_LIMIT: int = 16
DEGENERATE_FLOOR: float = 1e-14
PRESET_COUNT: int = 5
SUPREMUM_CANDIDATES: int = 32


def rademacher_sample(k: int, trials: int, seed: int) -> np.ndarray:
    """Матрица trials × k независимых знаков ±1, воспроизводимая по seed"""

    if k < 1 or trials < 1:
        raise InvalidArgumentError("k and trials must be at least 1")
    rng: np.random.Generator = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(RADEMACHER_STREAM,))
    )
    return 2.0 * rng.integers(0, 2, size=(trials, k)).astype(np.float64) - 1.0


def identity_family(measure: np.ndarray, constant: float = 1.0) -> OperatorFamily:
    return OperatorFamily(
        label="identity" if constant == 1.0 else f"identity({constant:g})",
        parameter_domain=(-np.inf, np.inf),
        measure=measure,
        scale=constant,
    )


def heat_gradient_family(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    channel: GammaChannel = GammaChannel.BOTH,
) -> OperatorFamily:
    """{√t Γe^{−tL}: t > 0}"""

    return OperatorFamily(
        label="heat-gradient",
        parameter_domain=(0.0, np.inf),
        measure=bundle.measure,
        gamma=bundle.gamma(channel),
        decomposition=dec,
        symbol=lambda t, lam: np.sqrt(t) * np.exp(-t * lam),
        resonance=lambda lam: 1.0 / (2.0 * lam),
    )


def resolvent_family(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    delta_prime: float = 1.0,
    channel: GammaChannel = GammaChannel.BOTH,
    override: bool = False,
) -> OperatorFamily:
    """{√t Γ(I + tL)^{−δ′}: t > 0}"""

    resolvent: MultiplierFunction = MultiplierFunction.resolvent(
        delta_prime=delta_prime, override=override
    )
    power: float = resolvent.delta_prime

    def resonance(lam: float) -> float:
        if power <= 0.5:
            return np.inf
        return 1.0 / ((2.0 * power - 1.0) * lam)

    return OperatorFamily(
        label=f"resolvent({power:g})",
        parameter_domain=(0.0, np.inf),
        measure=bundle.measure,
        gamma=bundle.gamma(channel),
        decomposition=dec,
        symbol=lambda t, lam: np.sqrt(t) * np.power(1.0 + t * lam, -power),
        resonance=resonance,
    )


def local_family(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    channel: GammaChannel = GammaChannel.BOTH,
) -> OperatorFamily:
    """{√t Γe^{−tL}: 0 < t ≤ 1}"""

    return OperatorFamily(
        label="local",
        parameter_domain=(0.0, 1.0),
        measure=bundle.measure,
        gamma=bundle.gamma(channel),
        decomposition=dec,
        symbol=lambda t, lam: np.sqrt(t) * np.exp(-t * lam),
        resonance=lambda lam: min(1.0 / (2.0 * lam), 1.0),
    )


def infinity_family(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    channel: GammaChannel = GammaChannel.BOTH,
) -> OperatorFamily:
    """{√(t − 1) Γe^{−tL}: t > 1}"""

    return OperatorFamily(
        label="infinity",
        parameter_domain=(1.0, np.inf),
        measure=bundle.measure,
        gamma=bundle.gamma(channel),
        decomposition=dec,
        symbol=lambda t, lam: np.sqrt(t - 1.0) * np.exp(-t * lam),
        resonance=lambda lam: 1.0 + 1.0 / (2.0 * lam),
    )


FAMILY_BUILDERS: Dict[str, Callable[..., OperatorFamily]] = {
    "heat-gradient": heat_gradient_family,
    "resolvent": resolvent_family,
    "local": local_family,
    "infinity": infinity_family,
}


def build_family(
    name: str,
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    channel: GammaChannel = GammaChannel.BOTH,
    delta_prime: float = 1.0,
    constant: float = 1.0,
) -> OperatorFamily:
    if name == "identity":
        return identity_family(measure=bundle.measure, constant=constant)
    if name not in FAMILY_BUILDERS:
        raise InvalidArgumentError(
            f"unknown family {name!r}; expected identity or one of {sorted(FAMILY_BUILDERS)}"
        )
    if name == "resolvent":
        return resolvent_family(bundle=bundle, dec=dec, delta_prime=delta_prime, channel=channel)
    return FAMILY_BUILDERS[name](bundle=bundle, dec=dec, channel=channel)


def _column_norms(measure: np.ndarray, values: np.ndarray, p: float) -> np.ndarray:
    return np.power(np.sum(measure[:, None] * np.abs(values) ** p, axis=0), 1.0 / p)


def _images(
    family: OperatorFamily, t_list: Sequence[float], columns: np.ndarray
) -> np.ndarray:
    if len(t_list) != columns.shape[1]:
        raise InvalidArgumentError(
            f"{len(t_list)} parameters given for {columns.shape[1]} functions"
        )
    return np.column_stack(
        [family.apply(t=float(t), f=columns[:, k]) for k, t in enumerate(t_list)]
    )


def _check_exponent(p: float) -> None:
    if not p > 1 or not np.isfinite(p):
        raise InvalidArgumentError(f"p must be a finite exponent above 1, got {p}")


def rbound_ratio_square(
    family: OperatorFamily,
    p: float,
    t_list: Sequence[float],
    f_list: FunctionList,
) -> RBoundEstimate:
    """‖(Σ_k |T_k f_k|²)^{1/2}‖_p / ‖(Σ_k |f_k|²)^{1/2}‖_p"""

    _check_exponent(p=p)
    columns: np.ndarray = as_columns(f_list=f_list, n=family.n)
    images: np.ndarray = _images(family=family, t_list=t_list, columns=columns)
    numerator_field: np.ndarray = np.sqrt(np.sum(family.energy(images), axis=1))
    denominator_field: np.ndarray = np.sqrt(np.sum(columns * columns, axis=1))

    denominator: float = float(_column_norms(family.measure, denominator_field[:, None], p)[0])
    if denominator < DEGENERATE_FLOOR:
        raise DegenerateInputError("square-function denominator vanishes")
    ratio: float = float(_column_norms(family.measure, numerator_field[:, None], p)[0]) / denominator
    return RBoundEstimate(
        family=family.label,
        formulation=Formulation.SQUARE_FUNCTION,
        p=p,
        trials=1,
        ratio_samples=[ratio],
        empirical_constant=ratio,
        mean_ratio=ratio,
        histogram=ratio_histogram([ratio]),
        best_t_list=[float(t) for t in t_list],
    )


def rbound_ratio_expectation(
    family: OperatorFamily,
    p: float,
    t_list: Sequence[float],
    f_list: FunctionList,
    trials: int = 256,
    seed: int = 0,
    batches: int = 8,
    exhaustive: bool = False,
) -> RBoundEstimate:
    """
    E‖Σ r_k T_k f_k‖_p / E‖Σ r_k f_k‖_p. Отношение записывается для каждого пакета
    знаков; exhaustive перебирает все 2^k наборов, при k = 1 случайность не нужна
    """

    _check_exponent(p=p)
    columns: np.ndarray = as_columns(f_list=f_list, n=family.n)
    k: int = columns.shape[1]
    images: np.ndarray = _images(family=family, t_list=t_list, columns=columns)

    if k == 1:
        signs: np.ndarray = np.ones((1, 1))
        batches = 1
    elif exhaustive:
        if k > EXHAUSTIVE_LIMIT:
            raise InvalidArgumentError(
                f"exhaustive sign enumeration is limited to k <= {EXHAUSTIVE_LIMIT}"
            )
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
        batches = 1
    else:
        if trials < 1:
            raise InvalidArgumentError("trials must be at least 1")
        signs = rademacher_sample(k=k, trials=trials, seed=seed)
        batches = max(1, min(batches, trials))

    numerators: np.ndarray = _column_norms(
        family.measure, family.magnitude(images @ signs.T), p
    )
    denominators: np.ndarray = _column_norms(family.measure, columns @ signs.T, p)
    if float(np.mean(denominators)) < DEGENERATE_FLOOR:
        raise DegenerateInputError("Rademacher-average denominator vanishes")

    samples: List[float] = []
    for part in np.array_split(np.arange(signs.shape[0]), batches):
        batch_denominator: float = float(np.mean(denominators[part]))
        if batch_denominator < DEGENERATE_FLOOR:
            raise DegenerateInputError("Rademacher batch denominator vanishes")
        samples.append(float(np.mean(numerators[part])) / batch_denominator)

    overall: float = float(np.mean(numerators) / np.mean(denominators))
    second_moment: float = float(
        np.sqrt(np.mean(numerators**2)) / np.sqrt(np.mean(denominators**2))
    )
    return RBoundEstimate(
        family=family.label,
        formulation=Formulation.EXPECTATION,
        p=p,
        seed=None if (k == 1 or exhaustive) else seed,
        trials=int(signs.shape[0]),
        ratio_samples=samples,
        empirical_constant=max(samples),
        mean_ratio=overall,
        second_moment_ratio=second_moment,
        histogram=ratio_histogram(samples),
        best_t_list=[float(t) for t in t_list],
    )


def rbound_l2valued(
    family: OperatorFamily,
    p: float,
    u: np.ndarray,
    t_quadrature: Tuple[np.ndarray, np.ndarray],
) -> RBoundEstimate:
    """
    ‖(∫ |S_t u(t)|² dt)^{1/2}‖_p / ‖(∫ |u(t)|² dt)^{1/2}‖_p; u задана на узлах
    квадратуры (узлы × вершины)
    """

    _check_exponent(p=p)
    nodes, weights = (np.asarray(part, dtype=np.float64) for part in t_quadrature)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (nodes.size, family.n) or weights.shape != nodes.shape:
        raise InvalidArgumentError("u must be tabulated as (nodes, vertices) with matching weights")
    if np.any(weights < 0):
        raise InvalidArgumentError("quadrature weights must be nonnegative")

    numerator_field: np.ndarray = np.zeros(family.n)
    for node, weight, values in zip(nodes, weights, u):
        numerator_field += weight * family.energy(family.apply(t=float(node), f=values))
    denominator_field: np.ndarray = (weights[:, None] * u * u).sum(axis=0)

    denominator: float = float(_column_norms(family.measure, np.sqrt(denominator_field)[:, None], p)[0])
    if denominator < DEGENERATE_FLOOR:
        raise DegenerateInputError("L2-valued denominator vanishes")
    ratio: float = float(
        _column_norms(family.measure, np.sqrt(numerator_field)[:, None], p)[0]
    ) / denominator
    return RBoundEstimate(
        family=family.label,
        formulation=Formulation.L2_VALUED,
        p=p,
        trials=1,
        ratio_samples=[ratio],
        empirical_constant=ratio,
        mean_ratio=ratio,
        histogram=ratio_histogram([ratio]),
    )


def _clamp(family: OperatorFamily, t: float) -> float:
    low, high = family.parameter_domain
    if t > high:
        return float(high)
    if t <= low:
        return float(low + t) if low > 0 else float(low + 1e-12)
    return float(t)


def _preset_input(
    family: OperatorFamily,
    battery: Optional[ProbeBattery],
    preset: int,
    k: int,
    index: int,
    rng: np.random.Generator,
) -> Tuple[List[float], np.ndarray]:
    """
    Наборы (t_k, f_k): 0: лестница λ_max⁻¹·4^j; 1: t у нуля; 2: t у масштаба
    спектральной щели; 3: резонанс (f = φ_j, t при максимуме символа); 4: лог-равномерно
    """

    if family.decomposition is None or battery is None:
        return [1.0] * k, rng.standard_normal((family.n, k))

    dec: SpectralDecomposition = family.decomposition
    top: float = dec.lambda_max if dec.lambda_max > 0 else 1.0
    gap: float = dec.lambda_min_positive
    positive: np.ndarray = np.flatnonzero(~dec.kernel_mask)

    if preset == 3 and positive.size:
        modes: np.ndarray = rng.choice(positive, size=k, replace=positive.size < k)
        columns: np.ndarray = dec.eigenvectors[:, modes]
        t_values: List[float] = [float(family.resonance(float(dec.eigenvalues[j]))) for j in modes]
    else:
        if preset == 0:
            rungs: int = max(int(np.ceil(np.log(40.0 * top / gap) / np.log(4.0))), 1)
            t_array: np.ndarray = 4.0 ** rng.integers(0, rungs + 1, size=k) / top
        elif preset == 1:
            t_array = 10.0 ** (-rng.uniform(0.0, 3.0, size=k)) / top
        elif preset == 2:
            t_array = np.exp(rng.uniform(-1.0, 1.0, size=k)) / gap
        else:
            t_array = np.exp(rng.uniform(np.log(1e-3 / top), np.log(10.0 / gap), size=k))
        t_values = [float(t) for t in t_array]
        columns = np.column_stack(
            [battery.probe(2 + index * k + column) for column in range(k)]
        )
    return [_clamp(family=family, t=t) for t in t_values], columns


def estimate_rbound_constant(
    family: OperatorFamily,
    p: float,
    budget: int,
    k_max: int,
    seed: int,
    formulation: Formulation = Formulation.SQUARE_FUNCTION,
    trials: int = 64,
) -> RBoundEstimate:
    """
    Наибольшее отношение по budget случайным наборам (t_k, f_k), k ≤ k_max, с
    чередованием заготовок. Это нижняя оценка константы, а не её значение
    """

    _check_exponent(p=p)
    if budget < 1 or k_max < 1:
        raise InvalidArgumentError("budget and k_max must be at least 1")
    if formulation is Formulation.L2_VALUED:
        raise InvalidArgumentError("the constant search uses the square or expectation form")

    battery: Optional[ProbeBattery] = (
        ProbeBattery(dec=family.decomposition, seed=seed, stream=ESTIMATOR_STREAM + 1)
        if family.decomposition is not None
        else None
    )
    samples: List[float] = []
    second_moments: List[float] = []
    best_ratio: float = -np.inf
    best_t_list: List[float] = []
    skipped: int = 0

    for index in range(budget):
        rng: np.random.Generator = probe_rng(seed=seed, stream=ESTIMATOR_STREAM, index=index)
        k: int = int(rng.integers(1, k_max + 1))
        t_list, columns = _preset_input(
            family=family, battery=battery, preset=index % PRESET_COUNT, k=k, index=index, rng=rng
        )
        try:
            if formulation is Formulation.EXPECTATION:
                estimate: RBoundEstimate = rbound_ratio_expectation(
                    family=family, p=p, t_list=t_list, f_list=columns, trials=trials, seed=seed + index
                )
                ratio: float = estimate.mean_ratio
                second_moments.append(estimate.second_moment_ratio)
            else:
                ratio = rbound_ratio_square(
                    family=family, p=p, t_list=t_list, f_list=columns
                ).empirical_constant
        except DegenerateInputError:
            skipped += 1
            continue
        samples.append(ratio)
        if ratio > best_ratio:
            best_ratio, best_t_list = ratio, t_list

    if not samples:
        raise DegenerateInputError(f"every input for {family.label} was degenerate")
    if skipped:
        logger.warning("%d of %d R-bound inputs were degenerate", skipped, budget)

    exact: Optional[float] = None
    if p == 2.0 and family.decomposition is not None:
        exact, _ = supremum_exact_norm(family=family)
    logger.debug("%s at p=%g: constant %.6g", family.label, p, max(samples))
    return RBoundEstimate(
        family=family.label,
        formulation=formulation,
        p=p,
        seed=seed,
        trials=budget,
        ratio_samples=samples,
        empirical_constant=max(samples),
        mean_ratio=float(np.mean(samples)),
        second_moment_ratio=max(second_moments) if second_moments else None,
        histogram=ratio_histogram(samples),
        best_t_list=best_t_list,
        exact_p2_bound=exact,
    )


def supremum_exact_norm(family: OperatorFamily) -> Tuple[float, float]:
    """
    sup_t ‖T_t‖_{2→2} по точной норме членов: старт из резонансных t собственных мод,
    затем уточнение minimize_scalar по log t
    """

    if family.decomposition is None:
        return abs(family.scale), 1.0

    dec: SpectralDecomposition = family.decomposition
    positive: np.ndarray = dec.eigenvalues[~dec.kernel_mask]
    if positive.size == 0:
        return 0.0, 1.0
    picks: np.ndarray = np.unique(
        np.quantile(positive, np.linspace(0.0, 1.0, SUPREMUM_CANDIDATES), method="nearest")
    )
    candidates: List[float] = [
        _clamp(family=family, t=float(family.resonance(float(lam)))) for lam in picks
    ]
    candidates = [t for t in candidates if np.isfinite(t)]
    if not candidates:
        candidates = [1.0 / float(positive[0])]

    values: List[float] = [family.exact_norm(t) for t in candidates]
    best: int = int(np.argmax(values))
    best_t: float = candidates[best]
    best_value: float = values[best]

    low, high = family.parameter_domain
    centre: float = np.log(best_t - low) if low > 0 else np.log(best_t)

    def objective(u: float) -> float:
        t: float = low + np.exp(u) if low > 0 else np.exp(u)
        if not family.contains(t):
            return 0.0
        return -family.exact_norm(t)

    result = optimize.minimize_scalar(
        objective, bounds=(centre - 1.5, centre + 1.5), method="bounded",
        options={"xatol": 1e-8},
    )
    if -result.fun > best_value:
        best_value = float(-result.fun)
        best_t = float(low + np.exp(result.x) if low > 0 else np.exp(result.x))
    return best_value, best_t
