import logging
from typing import Optional
from typing import Tuple

import numpy as np
from scipy import integrate
from scipy import linalg
from scipy import special

from src.errors import InvalidArgumentError
from src.errors import KernelCollisionError
from src.errors import ResourceLimitError
from src.models.models import MultiplierFunction
from src.models.models import MultiplierKind
from src.models.models import OperatorBundle
from src.models.models import SpectralDecomposition
from src.settings import numeric_defaults
from src.settings import project_settings

logger = logging.getLogger(__name__)


def decompose(
    bundle: OperatorBundle,
    cap: Optional[int] = None,
    kernel_tolerance_factor: float = numeric_defaults.KERNEL_TOLERANCE_FACTOR,
) -> SpectralDecomposition:
    """
    Плотное разложение L в скалярном произведении с мерой: симметризация
    M^{1/2} L M^{−1/2}, затем eigh. Собственные значения не выше порога ядра
    заменяются точным нулём, знак каждого вектора фиксируется
    """

    cap = project_settings.VERTEX_CAP if cap is None else cap
    if bundle.n > cap:
        raise ResourceLimitError(
            f"{bundle.n} active vertices exceed the vertex cap {cap} (LPS_VERTEX_CAP)",
            cap=cap,
        )

    root: np.ndarray = np.sqrt(bundle.measure)
    symmetric: np.ndarray = bundle.stiffness.toarray() / np.outer(root, root)
    symmetric[np.diag_indices_from(symmetric)] += bundle.potential
    symmetric = 0.5 * (symmetric + symmetric.T)

    eigenvalues, vectors = linalg.eigh(symmetric)
    top: float = float(np.max(np.abs(eigenvalues)))
    tolerance: float = kernel_tolerance_factor * (top if top > 0 else 1.0)
    eigenvalues = np.where(np.abs(eigenvalues) <= tolerance, 0.0, eigenvalues)
    eigenvalues = np.maximum(eigenvalues, 0.0)

    eigenvectors: np.ndarray = vectors / root[:, None]
    pivots: np.ndarray = np.argmax(np.abs(eigenvectors), axis=0)
    signs: np.ndarray = np.sign(eigenvectors[pivots, np.arange(eigenvectors.shape[1])])
    eigenvectors = eigenvectors * np.where(signs == 0, 1.0, signs)

    decomposition: SpectralDecomposition = SpectralDecomposition(
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        measure=bundle.measure,
        kernel_tolerance=tolerance,
    )
    logger.debug(
        "decomposed %s: n=%d, kernel_dim=%d, lambda_max=%.6g",
        bundle.graph.label,
        bundle.n,
        decomposition.kernel_dim,
        decomposition.lambda_max,
    )
    return decomposition


def apply_values(
    dec: SpectralDecomposition,
    values: np.ndarray,
    f: np.ndarray,
    project_kernel: bool = False,
) -> np.ndarray:
    """Σ_j values_j ⟨f, φ_j⟩_μ φ_j; f может быть матрицей со столбцами-функциями"""

    values = np.array(values, dtype=np.float64)
    kernel: np.ndarray = dec.kernel_mask
    undefined: np.ndarray = ~np.isfinite(values)

    if np.any(undefined & ~kernel):
        raise InvalidArgumentError("multiplier is not finite on the positive spectrum")
    if np.any(undefined & kernel) and not project_kernel:
        raise KernelCollisionError(
            "multiplier is undefined on ker L; request kernel projection to drop it"
        )
    if project_kernel:
        values[kernel] = 0.0

    coefficients: np.ndarray = dec.coefficients(np.asarray(f, dtype=np.float64))
    if coefficients.ndim == 2:
        return dec.synthesize(values[:, None] * coefficients)
    return dec.synthesize(values * coefficients)


def apply_function(
    dec: SpectralDecomposition,
    m: MultiplierFunction,
    f: np.ndarray,
    project_kernel: bool = False,
) -> np.ndarray:
    return apply_values(dec=dec, values=m(dec.eigenvalues), f=f, project_kernel=project_kernel)


def heat(dec: SpectralDecomposition, t: float, f: np.ndarray) -> np.ndarray:
    _check_time(t=t)
    return apply_values(dec=dec, values=np.exp(-t * dec.eigenvalues), f=f)


def poisson(dec: SpectralDecomposition, t: float, f: np.ndarray) -> np.ndarray:
    _check_time(t=t)
    return apply_values(dec=dec, values=np.exp(-t * np.sqrt(dec.eigenvalues)), f=f)


def subordinated_poisson(
    dec: SpectralDecomposition, t: float, f: np.ndarray
) -> np.ndarray:
    """
    e^{−t√L}f как интеграл ∫ η_t(s) e^{−sL}f ds по плотности субординатора
    η_t(s) = t/(2√π) s^{−3/2} e^{−t²/(4s)}. Интегрирование по u = log s до s_hi;
    для мод ядра остаток за s_hi равен erf(t/(2√s_hi))
    """

    _check_time(t=t)
    if t == 0:
        return np.array(f, dtype=np.float64)

    rate: float = dec.lambda_min_positive
    s_high: float = 60.0 / rate + 60.0 * t * t
    eigenvalues: np.ndarray = dec.eigenvalues
    normaliser: float = t / (2.0 * np.sqrt(np.pi))

    def integrand(u: float) -> np.ndarray:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            s: np.float64 = np.exp(np.float64(u))
            exponent: np.ndarray = -0.5 * u - t * t / (4.0 * s) - s * eigenvalues
            return np.nan_to_num(normaliser * np.exp(exponent), nan=0.0)

    values, _ = integrate.quad_vec(
        integrand, -np.inf, np.log(s_high), epsabs=1e-14, epsrel=1e-11, limit=400
    )
    values = np.where(dec.kernel_mask, values + special.erf(t / (2.0 * np.sqrt(s_high))), values)
    return apply_values(dec=dec, values=values, f=f)


def inverse_sqrt(
    dec: SpectralDecomposition, f: np.ndarray, project_kernel: bool = False
) -> np.ndarray:
    if dec.kernel_dim > 0 and not project_kernel:
        raise KernelCollisionError(
            f"L has a {dec.kernel_dim}-dimensional kernel; L^(-1/2) needs kernel projection"
        )
    with np.errstate(divide="ignore"):
        values: np.ndarray = np.where(dec.kernel_mask, np.inf, 1.0 / np.sqrt(dec.eigenvalues))
    return apply_values(dec=dec, values=values, f=f, project_kernel=True)


def resolvent_power(
    dec: SpectralDecomposition,
    t: float,
    delta_prime: float,
    f: np.ndarray,
    override: bool = False,
) -> np.ndarray:
    """(I + tL)^{−δ′}f; δ′ ≤ 1/2 допускается только с override"""

    _check_time(t=t)
    m: MultiplierFunction = MultiplierFunction.resolvent(
        delta_prime=delta_prime, override=override
    ).dilate(t)
    return apply_function(dec=dec, m=m, f=f)


def sobolev_norm(
    m: MultiplierFunction,
    delta: float,
    fft_resolution: Optional[int] = None,
    padding: int = 4,
) -> float:
    """
    Норма W^{δ,2}: (∫(1+ξ²)^δ |m̂(ξ)|² dξ)^{1/2} по дискретному преобразованию Фурье
    таблицы, дополненной нулями до padding·N точек. При fft_resolution таблица
    предварительно передискретизируется своим правилом интерполяции
    """

    if m.kind is not MultiplierKind.TABULATED:
        raise InvalidArgumentError("Sobolev norm needs a tabulated multiplier")
    if delta < 0:
        raise InvalidArgumentError(f"delta must be nonnegative, got {delta}")
    if padding < 1:
        raise InvalidArgumentError("padding factor must be at least 1")

    grid: np.ndarray = m.grid
    values: np.ndarray = m.values
    if fft_resolution is not None:
        grid = np.linspace(m.grid[0], m.grid[-1], fft_resolution)
        values = m(grid / m.scale)

    steps: np.ndarray = np.diff(grid)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise InvalidArgumentError("Sobolev norm needs a uniform tabulation grid")
    peak: float = float(np.max(np.abs(values)))
    if peak > 0 and max(abs(values[0]), abs(values[-1])) > 1e-8 * peak:
        raise InvalidArgumentError(
            "tabulation is not compactly supported: endpoint values do not vanish"
        )
    if peak == 0:
        return 0.0

    dx: float = float(steps[0])
    size: int = padding * values.size
    transform: np.ndarray = np.fft.fft(values, n=size) * dx / np.sqrt(2.0 * np.pi)
    xi: np.ndarray = 2.0 * np.pi * np.fft.fftfreq(size, d=dx)
    d_xi: float = 2.0 * np.pi / (size * dx)
    weight: np.ndarray = np.power(1.0 + xi * xi, delta)
    return float(np.sqrt(np.sum(weight * np.abs(transform) ** 2) * d_xi))


def sector_angle(p: float, epsilon: float = 0.0) -> float:
    """
    ω_p = arcsin|2/p − 1| + ε. Спектр L вещественный, поэтому угол сектора ни на что
    не влияет; ε принимается и возвращается как есть
    """

    if not p > 1:
        raise InvalidArgumentError(f"p must exceed 1, got {p}")
    return float(np.arcsin(abs(2.0 / p - 1.0)) + epsilon)


def required_sobolev_order(dim: int, p: float, domain: bool = False) -> Tuple[float, float]:
    """
    Порог гладкости мультипликатора N|1/2 − 1/p| + 1/2 (для областей + 3/2) и порядок
    на единицу выше, используемый при проверке семейств
    """

    if dim < 1 or not p > 1:
        raise InvalidArgumentError("dimension must be positive and p must exceed 1")
    threshold: float = dim * abs(0.5 - 1.0 / p) + (1.5 if domain else 0.5)
    return threshold, threshold + 1.0


def dyadic_bump_family(count: int) -> Tuple[MultiplierFunction, ...]:
    """m_k(λ) = bump(2^k λ), k = 0..count−1"""

    if count < 1:
        raise InvalidArgumentError("family must contain at least one multiplier")
    bump: MultiplierFunction = MultiplierFunction.bump()
    return tuple(bump.dilate(2.0**k) for k in range(count))


def tail_energy(m: MultiplierFunction, lam: float = 0.0) -> float:
    """M(λ) = ∫_λ^∞ |m(s)|² ds"""

    if lam < 0:
        raise InvalidArgumentError("tail energy needs lambda >= 0")

    def integrand(s: float) -> float:
        return float(m(s)) ** 2

    if m.kind is MultiplierKind.BUMP:
        low: float = max(lam, 0.5 / m.scale)
        high: float = 2.0 / m.scale
        if low >= high:
            return 0.0
        value, _ = integrate.quad(integrand, low, high, epsabs=1e-14, epsrel=1e-12, limit=200)
        return float(value)
    if m.kind is MultiplierKind.TABULATED:
        high = float(m.grid[-1]) / m.scale
        if lam >= high:
            return 0.0
        value, _ = integrate.quad(integrand, lam, high, epsabs=1e-14, epsrel=1e-12, limit=400)
        return float(value)

    value, _ = integrate.quad(integrand, lam, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    return float(value)


def _check_time(t: float) -> None:
    if t < 0:
        raise InvalidArgumentError(f"time must be nonnegative, got {t}")
