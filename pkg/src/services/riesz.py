import logging
from typing import Dict
from typing import List
from typing import Optional

import numpy as np

from src.errors import DegenerateInputError
from src.errors import InvalidArgumentError
from src.errors import KernelCollisionError
from src.models.models import GammaChannel
from src.models.models import GammaOperator
from src.models.models import OperatorBundle
from src.models.models import OperatorFamily
from src.models.models import RieszKind
from src.models.models import SpectralDecomposition
from src.schemas.schemas import InequalityReport
from src.schemas.schemas import RieszReport
from src.services.functionals import lp_norm
from src.services.hashing import array_digest
from src.services.probes import ProbeBattery
from src.services.probes import SearchOutcome
from src.services.probes import search
from src.services.spectral import apply_values
from src.services.spectral import decompose

logger = logging.getLogger(__name__)

RIESZ_STREAM: int = 21
CHEN_STREAM: int = 22
MULTIPLICATIVE_STREAM: int = 23
ZERO_FLOOR: float = 1e-12


def riesz_symbol(lam: np.ndarray, kind: RieszKind) -> np.ndarray:
    """ψ(λ): λ^{−1/2}, (λ + 1)^{−1/2} или λ^{−1/2}e^{−λ}; на нуле для full и infinity значение inf"""

    lam = np.asarray(lam, dtype=np.float64)
    if kind is RieszKind.LOCAL:
        return 1.0 / np.sqrt(lam + 1.0)
    with np.errstate(divide="ignore"):
        inverse_root: np.ndarray = np.where(lam > 0, 1.0 / np.sqrt(np.where(lam > 0, lam, 1.0)), np.inf)
    if kind is RieszKind.FULL:
        return inverse_root
    return inverse_root * np.exp(-lam)


def chen_multiplier(lam: np.ndarray) -> np.ndarray:
    """φ(z) = √(z+1)(1 − e^{−z})/√z, продолженная нулём в z = 0"""

    lam = np.asarray(lam, dtype=np.float64)
    safe: np.ndarray = np.where(lam > 0, lam, 1.0)
    return np.where(lam > 0, np.sqrt(safe + 1.0) * -np.expm1(-safe) / np.sqrt(safe), 0.0)


def riesz_image(
    dec: SpectralDecomposition,
    kind: RieszKind,
    f: np.ndarray,
    project_kernel: bool = True,
) -> np.ndarray:
    """ψ(L)f до применения Γ"""

    values: np.ndarray = riesz_symbol(dec.eigenvalues, kind)
    if kind is RieszKind.LOCAL:
        return apply_values(dec=dec, values=values, f=f)
    if dec.kernel_dim > 0 and not project_kernel:
        raise KernelCollisionError(
            f"{kind.value} Riesz transform is undefined on ker L (dimension {dec.kernel_dim}); "
            "enable kernel projection"
        )
    return apply_values(dec=dec, values=values, f=f, project_kernel=True)


def riesz_apply(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    kind: RieszKind,
    f: np.ndarray,
    channel: GammaChannel = GammaChannel.BOTH,
    project_kernel: bool = True,
) -> np.ndarray:
    """|Γ ψ(L) f|(x)"""

    image: np.ndarray = riesz_image(dec=dec, kind=kind, f=f, project_kernel=project_kernel)
    return bundle.gamma(channel).field(image)


def riesz_family(
    bundle: OperatorBundle,
    dec: SpectralDecomposition,
    kind: RieszKind,
    channel: GammaChannel = GammaChannel.BOTH,
) -> OperatorFamily:
    """Одноэлементное семейство {Γψ(L)} для точной нормы в L²"""

    values: np.ndarray = riesz_symbol(dec.eigenvalues, kind)
    if kind is not RieszKind.LOCAL:
        values = np.where(dec.kernel_mask, 0.0, values)
    return OperatorFamily(
        label=f"riesz-{kind.value}",
        parameter_domain=(0.0, np.inf),
        measure=bundle.measure,
        gamma=bundle.gamma(channel),
        decomposition=dec,
        symbol=lambda t, lam: values,
    )


def estimate_riesz_norm(
    bundle: OperatorBundle,
    kind: RieszKind,
    p: float,
    budget: int,
    seed: int,
    dec: Optional[SpectralDecomposition] = None,
    channel: GammaChannel = GammaChannel.BOTH,
) -> RieszReport:
    """Нижняя оценка ‖Γψ(L)‖_{p→p} по общему набору проб, при p = 2 также точная норма"""

    if not p > 1:
        raise InvalidArgumentError(f"p must exceed 1, got {p}")
    dec = dec if dec is not None else decompose(bundle=bundle)
    battery: ProbeBattery = ProbeBattery(dec=dec, seed=seed)

    def objective(f: np.ndarray) -> float:
        denominator: float = lp_norm(space=bundle, f=f, p=p)
        if denominator < ZERO_FLOOR:
            raise DegenerateInputError("probe has vanishing norm")
        field: np.ndarray = riesz_apply(bundle=bundle, dec=dec, kind=kind, f=f, channel=channel)
        return lp_norm(space=bundle, f=field, p=p) / denominator

    outcome: SearchOutcome = search(battery=battery, budget=budget, objective=objective)
    if outcome.witness is None:
        raise DegenerateInputError("no probe produced a finite Riesz ratio")

    residuals: Dict[str, float] = {
        "witness_reproduction": abs(objective(outcome.witness) - outcome.best_value),
    }
    exact: Optional[float] = None
    if p == 2.0:
        exact = riesz_family(bundle=bundle, dec=dec, kind=kind, channel=channel).exact_norm(1.0)
        if kind is RieszKind.FULL and channel is GammaChannel.BOTH:
            image_norm: float = lp_norm(
                space=bundle, f=riesz_apply(bundle, dec, kind, outcome.witness), p=2.0
            )
            orthogonal: float = lp_norm(space=bundle, f=dec.project_kernel(outcome.witness), p=2.0)
            residuals["quadratic_form_identity"] = abs(image_norm**2 - orthogonal**2)

    logger.debug("riesz %s at p=%g: %.6g", kind.value, p, outcome.best_value)
    return RieszReport(
        kind=kind,
        channel=channel,
        p=p,
        budget=budget,
        seed=seed,
        empirical_norm=outcome.best_value,
        witness_digest=array_digest(outcome.witness),
        kernel_dim=dec.kernel_dim,
        exact_p2_norm=exact,
        residuals=residuals,
        witness=outcome.witness,
    )


def chen_decomposition_check(
    bundle: OperatorBundle,
    p: float,
    budget: int,
    seed: int = 0,
    dec: Optional[SpectralDecomposition] = None,
    channel: GammaChannel = GammaChannel.BOTH,
) -> InequalityReport:
    """
    ‖ΓL^{−1/2}f‖_p ≤ ‖ΓL^{−1/2}e^{−L}f‖_p + ‖Γ(L+I)^{−1/2}φ(L)f‖_p на пробах;
    записывается наибольшее LHS − RHS и невязка самого разложения
    """

    dec = dec if dec is not None else decompose(bundle=bundle)
    gamma: GammaOperator = bundle.gamma(channel)
    residuals: List[float] = []

    def objective(f: np.ndarray) -> float:
        if lp_norm(space=bundle, f=f, p=p) < ZERO_FLOOR:
            raise DegenerateInputError("probe has vanishing norm")
        full: np.ndarray = gamma.apply(riesz_image(dec=dec, kind=RieszKind.FULL, f=f))
        at_infinity: np.ndarray = gamma.apply(riesz_image(dec=dec, kind=RieszKind.INFINITY, f=f))
        local_values: np.ndarray = riesz_symbol(dec.eigenvalues, RieszKind.LOCAL) * chen_multiplier(
            dec.eigenvalues
        )
        local: np.ndarray = gamma.apply(apply_values(dec=dec, values=local_values, f=f))

        scale: float = max(1.0, float(np.max(np.abs(full))))
        residuals.append(float(np.max(np.abs(full - at_infinity - local))) / scale)
        lhs: float = lp_norm(space=bundle, f=gamma.magnitude(full), p=p)
        rhs: float = lp_norm(space=bundle, f=gamma.magnitude(at_infinity), p=p) + lp_norm(
            space=bundle, f=gamma.magnitude(local), p=p
        )
        return lhs - rhs

    battery: ProbeBattery = ProbeBattery(dec=dec, seed=seed, stream=CHEN_STREAM)
    outcome: SearchOutcome = search(battery=battery, budget=budget, objective=objective)

    positive: np.ndarray = dec.eigenvalues[~dec.kernel_mask]
    phi: np.ndarray = chen_multiplier(positive) if positive.size else np.zeros(1)
    return InequalityReport(
        name="chen_decomposition",
        p=p,
        max_value=outcome.best_value,
        witness_digest=array_digest(outcome.witness) if outcome.witness is not None else "",
        probes_evaluated=len(outcome.values),
        probes_skipped=outcome.skipped,
        measured={
            "identity_residual": max(residuals) if residuals else 0.0,
            "phi_sup": float(np.max(phi)),
            "phi_at_lambda_max": float(chen_multiplier(dec.lambda_max)),
            "phi_at_lambda_min": float(chen_multiplier(dec.lambda_min_positive)),
        },
    )


def multiplicative_inequality_check(
    bundle: OperatorBundle,
    p: float,
    budget: int,
    seed: int = 0,
    dec: Optional[SpectralDecomposition] = None,
    channel: GammaChannel = GammaChannel.BOTH,
) -> InequalityReport:
    """Наибольшее ‖Γf‖_p² / (‖Lf‖_p‖f‖_p); нулевые f и f с Lf ≈ 0 пропускаются"""

    dec = dec if dec is not None else decompose(bundle=bundle)
    gamma: GammaOperator = bundle.gamma(channel)

    def objective(f: np.ndarray) -> float:
        norm: float = lp_norm(space=bundle, f=f, p=p)
        if norm < ZERO_FLOOR:
            raise DegenerateInputError("probe has vanishing norm")
        image_norm: float = lp_norm(space=bundle, f=bundle.apply(f), p=p)
        if image_norm < ZERO_FLOOR * max(norm, 1.0):
            raise DegenerateInputError("probe lies in ker L")
        return lp_norm(space=bundle, f=gamma.field(f), p=p) ** 2 / (image_norm * norm)

    battery: ProbeBattery = ProbeBattery(dec=dec, seed=seed, stream=MULTIPLICATIVE_STREAM)
    outcome: SearchOutcome = search(battery=battery, budget=budget, objective=objective)
    if outcome.witness is None:
        raise DegenerateInputError("every probe lies in ker L")
    return InequalityReport(
        name="multiplicative",
        p=p,
        max_value=outcome.best_value,
        witness_digest=array_digest(outcome.witness),
        probes_evaluated=len(outcome.values),
        probes_skipped=outcome.skipped,
    )
