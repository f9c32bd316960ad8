import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import InvalidArgumentError
from src.models.models import GammaChannel
from src.schemas.schemas import Formulation
from src.schemas.schemas import RBoundEstimate
from src.schemas.schemas import ratio_histogram
from src.services.rbound import build_family
from src.services.rbound import estimate_rbound_constant
from src.services.rbound import heat_gradient_family
from src.services.rbound import identity_family
from src.services.rbound import infinity_family
from src.services.rbound import local_family
from src.services.rbound import rademacher_sample
from src.services.rbound import rbound_l2valued
from src.services.rbound import rbound_ratio_expectation
from src.services.rbound import rbound_ratio_square
from src.services.rbound import supremum_exact_norm

HEAT_GRADIENT_BOUND = (2.0 * np.e) ** -0.5


@pytest.mark.parametrize("bundle_name, dec_name", [("grid_bundle", "grid_dec"), ("path_bundle", "path_dec")])
def test_heat_gradient_supremum_is_exact(bundle_name, dec_name, request):
    bundle = request.getfixturevalue(bundle_name)
    dec = request.getfixturevalue(dec_name)

    value, t_star = supremum_exact_norm(heat_gradient_family(bundle=bundle, dec=dec))

    assert value == pytest.approx(HEAT_GRADIENT_BOUND, rel=1e-8)
    assert t_star > 0


def test_other_families_stay_below_the_heat_bound(grid_bundle, grid_dec):
    gradient_only, _ = supremum_exact_norm(
        heat_gradient_family(bundle=grid_bundle, dec=grid_dec, channel=GammaChannel.GRADIENT)
    )
    local, local_t = supremum_exact_norm(local_family(bundle=grid_bundle, dec=grid_dec))
    at_infinity, infinity_t = supremum_exact_norm(infinity_family(bundle=grid_bundle, dec=grid_dec))

    assert gradient_only <= HEAT_GRADIENT_BOUND + 1e-9
    assert local == pytest.approx(HEAT_GRADIENT_BOUND, rel=1e-8)
    assert 0 < local_t <= 1.0
    assert at_infinity < HEAT_GRADIENT_BOUND
    assert infinity_t > 1.0


def test_family_parameter_domain(grid_bundle, grid_dec):
    family = local_family(bundle=grid_bundle, dec=grid_dec)

    with pytest.raises(InvalidArgumentError):
        family.apply(t=2.0, f=np.ones(grid_bundle.n))


def test_identity_family_ratio_equals_constant(grid_bundle, rng):
    family = identity_family(measure=grid_bundle.measure, constant=2.0)
    columns = rng.standard_normal((grid_bundle.n, 3))

    square = rbound_ratio_square(family=family, p=3.0, t_list=[1.0, 2.0, 3.0], f_list=columns)
    expectation = rbound_ratio_expectation(
        family=family, p=3.0, t_list=[1.0, 2.0, 3.0], f_list=columns, exhaustive=True
    )

    assert square.empirical_constant == pytest.approx(2.0)
    assert expectation.mean_ratio == pytest.approx(2.0)
    assert expectation.trials == 8
    assert expectation.seed is None


def test_square_ratio_for_one_member_is_bounded_by_exact_norm(grid_bundle, grid_dec, rng):
    family = heat_gradient_family(bundle=grid_bundle, dec=grid_dec)
    f = rng.standard_normal(grid_bundle.n)

    ratio = rbound_ratio_square(family=family, p=2.0, t_list=[0.3], f_list=f).empirical_constant

    assert ratio <= family.exact_norm(0.3) + 1e-12


def test_exhaustive_second_moment_equals_square_ratio_at_two(grid_bundle, grid_dec, rng):
    family = heat_gradient_family(bundle=grid_bundle, dec=grid_dec)
    columns = rng.standard_normal((grid_bundle.n, 4))
    t_list = [0.05, 0.4, 1.0, 3.0]

    square = rbound_ratio_square(family=family, p=2.0, t_list=t_list, f_list=columns)
    expectation = rbound_ratio_expectation(
        family=family, p=2.0, t_list=t_list, f_list=columns, exhaustive=True
    )

    assert expectation.second_moment_ratio == pytest.approx(square.empirical_constant, rel=1e-10)
    assert expectation.trials == 16


def test_sampled_expectation_is_reproducible(grid_bundle, grid_dec, rng):
    family = heat_gradient_family(bundle=grid_bundle, dec=grid_dec)
    columns = rng.standard_normal((grid_bundle.n, 5))
    t_list = [0.1, 0.2, 0.4, 0.8, 1.6]

    first = rbound_ratio_expectation(family=family, p=1.5, t_list=t_list, f_list=columns, trials=64, seed=3)
    second = rbound_ratio_expectation(family=family, p=1.5, t_list=t_list, f_list=columns, trials=64, seed=3)

    assert first.ratio_samples == second.ratio_samples
    assert len(first.ratio_samples) == 8
    assert first.empirical_constant == max(first.ratio_samples)


def test_rademacher_sample():
    signs = rademacher_sample(k=3, trials=10, seed=1)

    assert signs.shape == (10, 3)
    assert set(np.unique(signs)) <= {-1.0, 1.0}
    assert np.array_equal(signs, rademacher_sample(k=3, trials=10, seed=1))


def test_rademacher_columns_are_centred():
    signs = rademacher_sample(k=8, trials=10000, seed=0)

    assert np.all(np.abs(signs.mean(axis=0)) <= 0.05)


def test_l2_valued_ratio_for_identity(grid_bundle, rng):
    family = identity_family(measure=grid_bundle.measure)
    nodes = np.array([0.5, 1.0, 2.0])
    weights = np.array([0.25, 0.5, 0.25])
    u = rng.standard_normal((3, grid_bundle.n))

    estimate = rbound_l2valued(family=family, p=2.5, u=u, t_quadrature=(nodes, weights))

    assert estimate.empirical_constant == pytest.approx(1.0)
    assert estimate.formulation is Formulation.L2_VALUED


def test_constant_search_stays_below_exact_bound_at_two(grid_bundle, grid_dec):
    family = heat_gradient_family(bundle=grid_bundle, dec=grid_dec)

    estimate = estimate_rbound_constant(family=family, p=2.0, budget=10, k_max=3, seed=0)

    assert estimate.exact_p2_bound == pytest.approx(HEAT_GRADIENT_BOUND, rel=1e-8)
    assert estimate.empirical_constant <= estimate.exact_p2_bound + 1e-9
    assert len(estimate.histogram) == 34
    assert sum(estimate.histogram) == len(estimate.ratio_samples)


def test_constant_search_expectation_form(grid_bundle, grid_dec):
    family = heat_gradient_family(bundle=grid_bundle, dec=grid_dec)

    estimate = estimate_rbound_constant(
        family=family, p=3.0, budget=5, k_max=3, seed=1, formulation=Formulation.EXPECTATION, trials=16
    )

    assert estimate.formulation is Formulation.EXPECTATION
    assert estimate.second_moment_ratio is not None
    assert estimate.exact_p2_bound is None


def test_constant_search_rejects_l2_valued(grid_bundle, grid_dec):
    with pytest.raises(InvalidArgumentError):
        estimate_rbound_constant(
            family=heat_gradient_family(bundle=grid_bundle, dec=grid_dec),
            p=2.0,
            budget=2,
            k_max=2,
            seed=0,
            formulation=Formulation.L2_VALUED,
        )


def test_build_family(grid_bundle, grid_dec):
    assert build_family("identity", grid_bundle, grid_dec).label == "identity"
    assert build_family("resolvent", grid_bundle, grid_dec, delta_prime=2.0).label == "resolvent(2)"
    with pytest.raises(InvalidArgumentError):
        build_family("wave", grid_bundle, grid_dec)
    with pytest.raises(InvalidArgumentError):
        build_family("resolvent", grid_bundle, grid_dec, delta_prime=0.5)


def test_ratio_histogram():
    counts = ratio_histogram([1e-9, 0.5, 1.0, 1e3])

    assert len(counts) == 34
    assert counts[0] == 1
    assert counts[-1] == 1
    assert sum(counts) == 4


def test_estimate_schema_requires_consistent_constant():
    with pytest.raises(ValidationError):
        RBoundEstimate(
            family="identity",
            formulation=Formulation.SQUARE_FUNCTION,
            p=2.0,
            trials=1,
            ratio_samples=[0.5],
            empirical_constant=0.7,
            mean_ratio=0.5,
        )
