import numpy as np
import pytest

from src.errors import DivergenceError
from src.errors import InvalidArgumentError
from src.errors import KernelCollisionError
from src.errors import ResourceLimitError
from src.errors import UnsupportedError
from src.models.models import CombineRule
from src.models.models import FunctionalKind
from src.models.models import FunctionalSpec
from src.models.models import GammaChannel
from src.models.models import MultiplierFunction
from src.services.functionals import FunctionalEvaluator
from src.services.functionals import build_time_grid
from src.services.functionals import estimate_functional_norm
from src.services.functionals import field_rows
from src.services.functionals import lp_norm
from src.services.functionals import lps_exact_gram
from src.services.functionals import lps_quadrature
from src.services.functionals import norm_curve_integral
from src.services.functionals import sequence_rhs_norm


def test_lp_norm():
    measure = np.ones(2)

    assert lp_norm(space=measure, f=np.array([3.0, -4.0]), p=2.0) == pytest.approx(5.0)
    assert lp_norm(space=measure, f=np.array([3.0, -4.0]), p=np.inf) == 4.0
    assert lp_norm(space=2.0 * measure, f=np.array([3.0, 4.0]), p=2.0) == pytest.approx(np.sqrt(50.0))
    assert lp_norm(space=measure, f=np.zeros(2), p=3.0) == 0.0
    assert lp_norm(space=measure, f=np.array([1e200, 1e200]), p=4.0) == pytest.approx(1e200 * 2**0.25)


@pytest.mark.parametrize("f, p", [(np.ones(2), 0.5), (np.ones(3), 2.0), (np.ones(2), np.nan)])
def test_lp_norm_rejects_bad_input(f, p):
    with pytest.raises(InvalidArgumentError):
        lp_norm(space=np.ones(2), f=f, p=p)


def test_sequence_rhs_norm(grid_bundle):
    f = np.ones(grid_bundle.n)

    assert sequence_rhs_norm(space=grid_bundle, f_list=[3.0 * f, 4.0 * f], p=2.0) == pytest.approx(
        5.0 * lp_norm(space=grid_bundle, f=f, p=2.0)
    )


def test_time_grid_contains_one(grid_dec):
    grid = build_time_grid(dec=grid_dec)

    assert 1.0 in grid.nodes
    assert grid.t_min <= 1e-6 / grid_dec.lambda_max * 1.0001
    assert grid.t_max >= 40.0 / grid_dec.lambda_min_positive * 0.9999
    assert grid.refined().log_step == pytest.approx(grid.log_step / 2.0)


@pytest.mark.parametrize("bundle_name, dec_name", [("grid_bundle", "grid_dec"), ("path_bundle", "path_dec")])
def test_rss_square_function_identity(bundle_name, dec_name, request, rng):
    bundle = request.getfixturevalue(bundle_name)
    dec = request.getfixturevalue(dec_name)
    spec = FunctionalSpec(kind=FunctionalKind.H, combine=CombineRule.RSS)

    for _ in range(3):
        f = rng.standard_normal(bundle.n)
        value = lp_norm(space=bundle, f=lps_quadrature(bundle, dec, spec, f), p=2.0) ** 2
        target = 0.5 * lp_norm(space=bundle, f=dec.project_kernel(f), p=2.0) ** 2
        assert value == pytest.approx(target, rel=1e-6)


def test_norm_curve_integral_at_two(grid_bundle, grid_dec, rng):
    f = rng.standard_normal(grid_bundle.n)

    assert norm_curve_integral(grid_bundle, grid_dec, f, p=2.0) == pytest.approx(
        0.5 * lp_norm(space=grid_bundle, f=f, p=2.0) ** 2, rel=1e-6
    )


@pytest.mark.parametrize(
    "spec",
    [
        FunctionalSpec(kind=FunctionalKind.H),
        FunctionalSpec(kind=FunctionalKind.H, channel=GammaChannel.POTENTIAL),
        FunctionalSpec(kind=FunctionalKind.H_LOC, channel=GammaChannel.GRADIENT),
        FunctionalSpec(kind=FunctionalKind.H_INF),
        FunctionalSpec(kind=FunctionalKind.H_F, outer=MultiplierFunction.zheat()),
        FunctionalSpec(
            kind=FunctionalKind.H,
            multipliers=(MultiplierFunction.heat(), MultiplierFunction.resolvent(delta_prime=1.0)),
        ),
    ],
    ids=["H", "H-potential", "H_loc-gradient", "H_inf", "H_F-zexp", "H-two-multipliers"],
)
def test_quadrature_agrees_with_gram_oracle(spec, grid_bundle, grid_dec, rng):
    f = rng.standard_normal((grid_bundle.n, spec.k))

    quadrature = lps_quadrature(grid_bundle, grid_dec, spec, f)
    exact = lps_exact_gram(grid_bundle, grid_dec, spec, f)

    assert np.max(np.abs(quadrature - exact)) <= 1e-4 * max(1.0, float(np.max(np.abs(exact))))


def test_gram_oracle_limits(grid_bundle, grid_dec, rng):
    f = rng.standard_normal(grid_bundle.n)

    with pytest.raises(ResourceLimitError):
        lps_exact_gram(grid_bundle, grid_dec, FunctionalSpec(), f, cap=10)
    with pytest.raises(UnsupportedError):
        lps_exact_gram(
            grid_bundle, grid_dec, FunctionalSpec(kind=FunctionalKind.G, multipliers=(MultiplierFunction.bump(),)), f
        )
    with pytest.raises(UnsupportedError):
        lps_exact_gram(
            grid_bundle, grid_dec, FunctionalSpec(kind=FunctionalKind.H_F, outer=MultiplierFunction.poisson()), f
        )


def test_g_functional_with_bumps_is_finite(grid_bundle, grid_dec, rng):
    spec = FunctionalSpec(
        kind=FunctionalKind.G, multipliers=(MultiplierFunction.bump(), MultiplierFunction.bump().dilate(2.0))
    )
    values = FunctionalEvaluator(grid_bundle, grid_dec, spec).evaluate(rng.standard_normal((grid_bundle.n, 2)))

    assert values.shape == (grid_bundle.n,)
    assert np.all(np.isfinite(values))
    assert np.all(values >= 0)


def test_non_decaying_outer_function_diverges(grid_bundle, grid_dec, rng):
    spec = FunctionalSpec(kind=FunctionalKind.H_F, outer=MultiplierFunction.constant_function())

    with pytest.raises(DivergenceError):
        FunctionalEvaluator(grid_bundle, grid_dec, spec).evaluate(rng.standard_normal(grid_bundle.n))


def test_singular_multiplier_collides_with_kernel_on_finite_interval(path_bundle, path_dec, rng):
    spec = FunctionalSpec(kind=FunctionalKind.H_LOC, multipliers=(MultiplierFunction.power(-0.5),))

    with pytest.raises(KernelCollisionError):
        FunctionalEvaluator(path_bundle, path_dec, spec).evaluate(rng.standard_normal(path_bundle.n))


def test_semigroup_kinds_reject_outer_function():
    with pytest.raises(InvalidArgumentError):
        FunctionalSpec(kind=FunctionalKind.H, outer=MultiplierFunction.zheat())
    with pytest.raises(InvalidArgumentError):
        FunctionalSpec(multipliers=())


def test_combine_rules_order(grid_bundle, grid_dec, rng):
    f = rng.standard_normal(grid_bundle.n)
    evaluator = FunctionalEvaluator(grid_bundle, grid_dec, FunctionalSpec())

    summed = evaluator.evaluate(f, combine=CombineRule.SUM)
    rss = evaluator.evaluate(f, combine=CombineRule.RSS)

    assert np.all(rss <= summed + 1e-12)
    assert np.all(summed <= np.sqrt(2.0) * rss + 1e-12)


def test_q_functional_adds_semigroup_term(grid_bundle, grid_dec, rng):
    f = rng.standard_normal(grid_bundle.n)
    local = FunctionalEvaluator(grid_bundle, grid_dec, FunctionalSpec(kind=FunctionalKind.H_LOC)).evaluate(f)
    q_values = FunctionalEvaluator(grid_bundle, grid_dec, FunctionalSpec(kind=FunctionalKind.Q)).evaluate(f)
    smoothed = np.abs(grid_dec.synthesize(np.exp(-grid_dec.eigenvalues) * grid_dec.coefficients(f)))

    assert np.allclose(q_values, local + smoothed)


def test_estimate_reports_identity_at_two(grid_bundle, grid_dec):
    report = estimate_functional_norm(
        bundle=grid_bundle, spec=FunctionalSpec(), p=2.0, budget=6, seed=0, dec=grid_dec
    )

    assert report.identity_lhs == pytest.approx(report.identity_rhs, rel=1e-6)
    assert report.probes_evaluated + report.probes_skipped == 6
    assert 0 < report.empirical_constant <= np.sqrt(2.0) * np.sqrt(0.5) + 1e-6


def test_estimate_is_deterministic_and_monotone_in_budget(grid_bundle, grid_dec):
    spec = FunctionalSpec(kind=FunctionalKind.H_LOC)
    short = estimate_functional_norm(bundle=grid_bundle, spec=spec, p=3.0, budget=4, seed=2, dec=grid_dec)
    again = estimate_functional_norm(bundle=grid_bundle, spec=spec, p=3.0, budget=4, seed=2, dec=grid_dec)
    longer = estimate_functional_norm(bundle=grid_bundle, spec=spec, p=3.0, budget=8, seed=2, dec=grid_dec)

    assert short.witness_digest == again.witness_digest
    assert short.empirical_constant == again.empirical_constant
    assert longer.empirical_constant >= short.empirical_constant
    assert short.identity_lhs is None


def test_estimate_with_multiplier_tuple(grid_bundle, grid_dec):
    spec = FunctionalSpec(
        kind=FunctionalKind.H, multipliers=(MultiplierFunction.heat(), MultiplierFunction.poisson())
    )
    report = estimate_functional_norm(bundle=grid_bundle, spec=spec, p=1.5, budget=4, seed=0, dec=grid_dec)

    assert report.multipliers == ["exp", "poisson"]
    assert report.witness.shape == (grid_bundle.n, 2)


@pytest.mark.parametrize("p, budget", [(1.0, 4), (2.0, 0)])
def test_estimate_rejects_bad_arguments(p, budget, grid_bundle, grid_dec):
    with pytest.raises(InvalidArgumentError):
        estimate_functional_norm(bundle=grid_bundle, spec=FunctionalSpec(), p=p, budget=budget, seed=0, dec=grid_dec)


def test_field_rows(grid_bundle):
    rows = field_rows(bundle=grid_bundle, values=np.arange(grid_bundle.n, dtype=float))

    assert len(rows) == grid_bundle.n
    assert list(rows[7]) == ["vertex", "x0", "x1", "value"]
    assert rows[7]["value"] == 7.0


def test_h_inf_on_first_mode_matches_closed_form(grid_bundle, grid_dec):
    mode = int(np.flatnonzero(~grid_dec.kernel_mask)[0])
    f = grid_dec.eigenvectors[:, mode]
    closed = 0.5 * np.exp(-2.0 * grid_dec.eigenvalues[mode])
    spec = FunctionalSpec(kind=FunctionalKind.H_INF, combine=CombineRule.RSS)

    exact = lps_exact_gram(grid_bundle, grid_dec, spec, f)
    quadrature = lps_quadrature(grid_bundle, grid_dec, spec, f)

    assert lp_norm(space=grid_bundle, f=exact, p=2.0) ** 2 == pytest.approx(closed, abs=1e-6)
    assert lp_norm(space=grid_bundle, f=quadrature, p=2.0) ** 2 == pytest.approx(closed, abs=1e-6)


def test_q_of_constant_is_one_on_connected_free_graph(path_bundle, path_dec):
    values = FunctionalEvaluator(path_bundle, path_dec, FunctionalSpec(kind=FunctionalKind.Q)).evaluate(
        np.ones(path_bundle.n)
    )

    assert np.allclose(values, 1.0, atol=1e-9)
    assert lp_norm(space=path_bundle, f=values, p=3.0) == pytest.approx(
        lp_norm(space=path_bundle, f=np.ones(path_bundle.n), p=3.0), rel=1e-9
    )
