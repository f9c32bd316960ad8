import numpy as np
import pytest

from src.errors import InvalidArgumentError
from src.models.models import CombineRule
from src.models.models import FunctionalKind
from src.models.models import FunctionalSpec
from src.models.models import MultiplierFunction
from src.schemas.schemas import Verdict
from src.services.functionals import FunctionalEvaluator
from src.services.functionals import lp_norm
from src.services.functionals import sequence_rhs_norm
from src.services.graphs import build_radial_graph
from src.services.operators import attach_potential
from src.services.verify import _shen_cutoff
from src.services.verify import association
from src.services.verify import check_chen_triangle
from src.services.verify import check_connected_sum_growth
from src.services.verify import check_equivalence_study
from src.services.verify import check_kahane_consistency
from src.services.verify import check_local_equivalence
from src.services.verify import check_lower_bound_q
from src.services.verify import check_lps_p2_identity
from src.services.verify import check_multiplicative_p2
from src.services.verify import check_multiplier_order
from src.services.verify import check_Q_lower
from src.services.verify import check_reverse_duality
from src.services.verify import check_reverse_holder_growth
from src.services.verify import check_riesz_p2
from src.services.verify import check_shen_counterexample
from src.services.verify import check_stein_upper
from src.services.verify import check_uniform_bound
from src.services.verify import default_ladder
from src.services.verify import shen_series


def test_exact_checks_pass_on_grid(grid_bundle, grid_dec):
    results = [
        check_lps_p2_identity(bundle=grid_bundle, samples=4, dec=grid_dec),
        check_riesz_p2(bundle=grid_bundle, samples=5, budget=4, dec=grid_dec),
        check_chen_triangle(bundle=grid_bundle, budget=4, dec=grid_dec),
        check_multiplicative_p2(bundle=grid_bundle, budget=4, dec=grid_dec),
        check_stein_upper(bundle=grid_bundle, p=2.0, probes=4, dec=grid_dec),
        check_lower_bound_q(bundle=grid_bundle, q=2.0, probes=4, dec=grid_dec),
        check_uniform_bound(bundle=grid_bundle, p=2.0, dec=grid_dec),
    ]

    for result in results:
        assert result.exact, result.check_id
        assert result.verdict is Verdict.PASS, result.check_id


def test_uniform_bound_reports_the_exact_constant(grid_bundle, grid_dec):
    result = check_uniform_bound(bundle=grid_bundle, p=2.0, dec=grid_dec)

    assert result.measured["sup"] == pytest.approx(result.measured["bound"], rel=1e-8)


def test_lower_bound_excludes_kernel_probes(path_bundle, path_dec):
    result = check_lower_bound_q(bundle=path_bundle, q=2.0, probes=4, dec=path_dec)

    assert result.verdict is Verdict.PASS
    assert result.measured["excluded"] > 0
    assert "kernel probes excluded" in result.notes[0]


def test_exponent_ranges(grid_bundle, grid_dec, checkerboard_bundle):
    with pytest.raises(InvalidArgumentError):
        check_stein_upper(bundle=grid_bundle, p=3.0, dec=grid_dec)
    with pytest.raises(InvalidArgumentError):
        check_lower_bound_q(bundle=grid_bundle, q=1.5, dec=grid_dec)

    result = check_lower_bound_q(bundle=checkerboard_bundle, q=1.5, probes=2)
    assert result.verdict in (Verdict.PASS, Verdict.OBSERVE)
    assert not result.exact


def test_stein_away_from_two_is_not_exact(grid_bundle, grid_dec):
    result = check_stein_upper(bundle=grid_bundle, p=1.5, probes=2, dec=grid_dec)

    assert not result.exact
    assert result.verdict in (Verdict.PASS, Verdict.OBSERVE)
    assert result.measured["max_ratio"] > 0


def test_reverse_duality_refuses_vanishing_multiplier(grid_bundle, grid_dec):
    result = check_reverse_duality(
        bundle=grid_bundle, q=2.0, multipliers=[MultiplierFunction.constant_function(0.0)], dec=grid_dec
    )

    assert result.verdict is Verdict.VIOLATION
    assert result.exact
    assert result.notes[0].startswith("hypothesis violated, check refused")


def test_reverse_duality_with_heat_multiplier(grid_bundle, grid_dec):
    result = check_reverse_duality(
        bundle=grid_bundle, q=2.0, multipliers=[MultiplierFunction.heat()], probes=4, dec=grid_dec
    )

    assert result.verdict in (Verdict.PASS, Verdict.OBSERVE)
    assert result.measured["tail_energies"] == pytest.approx([0.5])


def test_reverse_duality_ratio_ignores_duplicated_terms(grid_bundle, grid_dec, rng):
    g = grid_dec.project_kernel(rng.standard_normal(grid_bundle.n))
    ratios = []
    for columns in (g[:, None], np.column_stack([g, g])):
        spec = FunctionalSpec(
            kind=FunctionalKind.G,
            multipliers=(MultiplierFunction.heat(),) * columns.shape[1],
            combine=CombineRule.SUM,
        )
        values = FunctionalEvaluator(grid_bundle, grid_dec, spec).evaluate(f_list=columns)
        ratios.append(
            lp_norm(space=grid_bundle, f=values, p=3.0)
            / sequence_rhs_norm(space=grid_bundle, f_list=columns, p=3.0)
        )

    assert ratios[1] == pytest.approx(ratios[0], rel=1e-10)


def test_q_lower_records_dual_constant(grid_bundle, grid_dec):
    result = check_Q_lower(bundle=grid_bundle, q=3.0, probes=2, dec=grid_dec)

    assert result.measured["dual_exponent"] == pytest.approx(1.5)
    assert result.measured["local_constant_at_dual"] > 0
    assert result.verdict in (Verdict.PASS, Verdict.OBSERVE)


@pytest.mark.parametrize(
    "first, second, expected",
    [
        ([1.0, 2.0, 3.0], [2.0, 4.0, 6.0], 1.0),
        ([1.0, 2.0, 3.0], [3.0, 2.0, 1.0], -1.0),
        ([1.0, 1.0, 1.0], [5.0, 5.0, 5.0], 1.0),
        ([1.0, 1.0, 1.0], [1.0, 2.0, 3.0], None),
    ],
)
def test_association(first, second, expected):
    assert association(first, second) == expected


def test_association_ignores_rounding_noise():
    assert association([1.0, 1.0 + 1e-13], [2.0, 2.0]) == 1.0


def test_shen_series_near_origin():
    values, terms = shen_series(radii=np.array([1e-8, 1.0]), n_dim=3, mu=0.5)

    assert values[0] == pytest.approx(0.5, rel=1e-3)
    assert values[1] > values[0]
    assert terms > 1


def test_shen_series_rejects_nonpositive_radius():
    with pytest.raises(InvalidArgumentError):
        shen_series(radii=np.array([0.0, 1.0]), n_dim=3, mu=0.5)


@pytest.mark.parametrize("n_dim, q0", [(3, 1.0), (3, 3.0), (2, 1.5)])
def test_shen_counterexample_rejects_exponents(n_dim, q0):
    with pytest.raises(InvalidArgumentError):
        check_shen_counterexample(n_dim=n_dim, q0=q0)


def test_shen_counterexample_measures_growth():
    result = check_shen_counterexample(n_dim=3, q0=2.0, refinements=(100, 200))
    measured = result.measured

    assert measured["mu"] == pytest.approx(0.5)
    assert measured["p0"] == pytest.approx(6.0)
    assert measured["harmonic_residual"][1] < measured["harmonic_residual"][0]
    assert measured["gradient_norm_p0"][1] >= measured["gradient_norm_p0"][0]
    assert measured["gradient_norm_growth"][0] == pytest.approx(
        measured["gradient_norm_p0"][1] / measured["gradient_norm_p0"][0] - 1.0
    )
    assert measured["u_norm_spread"] <= 0.10
    assert measured["g_norm_spread"] <= 0.10
    assert len(measured["gradient_peak_growth"]) == 1
    assert not result.exact


def test_shen_verdict_follows_gradient_norm_growth():
    result = check_shen_counterexample(n_dim=3, q0=2.0, refinements=(100, 200, 400))
    grows = min(result.measured["gradient_norm_growth"]) >= 0.15

    assert result.verdict is (Verdict.PASS if grows else Verdict.OBSERVE)
    if not grows:
        assert result.notes[-1].startswith("gradient L^6 norm grew by at most")


def test_shen_source_is_the_discrete_product_rule():
    graph = build_radial_graph(n_dim=3, r_max=3.0, m=100)
    free = attach_potential(graph=graph, V=0.0)
    radii = graph.positions[:, 0]
    v, _ = shen_series(radii=radii, n_dim=3, mu=0.5)
    phi = _shen_cutoff(radii=radii)

    g = free.apply(phi * v) - phi * free.apply(v)

    assert np.max(np.abs(g[radii <= 1.0 - 2.0 * graph.spacing])) <= 1e-12
    assert np.max(np.abs(g[radii >= 2.0 + 2.0 * graph.spacing])) <= 1e-12
    assert np.max(np.abs(g)) > 0.0


def test_default_ladder(grid_dec):
    ladder = default_ladder(grid_dec)

    assert ladder[0] == pytest.approx(1.0 / grid_dec.lambda_max)
    assert np.allclose(np.diff(np.log(ladder)), np.log(4.0))
    assert ladder[-1] * 4.0 >= 40.0 / grid_dec.lambda_min_positive


def test_kahane_second_moment_matches_square_form(grid_bundle, grid_dec):
    result = check_kahane_consistency(bundle=grid_bundle, exponents=(2.0, 3.0), k_max=3, inputs=6, dec=grid_dec)

    assert result.measured["p2_second_moment_deviation"] <= 1e-9
    assert set(result.measured["quotients"]) == {"2", "3"}
    assert not result.exact


def test_kahane_runs_two_hundred_inputs_by_default(grid_bundle, grid_dec):
    result = check_kahane_consistency(bundle=grid_bundle, dec=grid_dec)
    quotients = result.measured["quotients"]

    assert grid_bundle.n <= 40
    assert result.measured["inputs"] == 200
    assert set(quotients) == {"1.5", "2", "3"}
    assert all(0 < len(values) <= 200 for values in quotients.values())


def test_multiplier_order(grid_bundle, grid_dec):
    result = check_multiplier_order(bundle=grid_bundle, p=4.0, count=2, budget=2, dec=grid_dec)

    assert result.measured["dimension"] == 2
    assert result.measured["order"] == pytest.approx(result.measured["threshold"] + 1.0)
    assert len(result.measured["member_norms"]) == 2
    assert result.verdict is Verdict.OBSERVE


def test_equivalence_study_only_observes(grid_bundle, path_bundle):
    result = check_equivalence_study(p=3.0, battery=[grid_bundle, path_bundle], budget=2, k_max=2)

    assert result.verdict is Verdict.OBSERVE
    assert len(result.measured["functional_constants"]) == 2
    assert "no implication" in result.notes[0]

    with pytest.raises(InvalidArgumentError):
        check_equivalence_study(p=3.0, battery=[])


def test_local_equivalence_only_observes(grid_bundle, path_bundle):
    result = check_local_equivalence(p=3.0, battery=[grid_bundle, path_bundle], budget=2, k_max=2)

    assert result.check_id == "local_equivalence"
    assert result.verdict is Verdict.OBSERVE
    assert len(result.measured["rbound_constants"]) == 2

    with pytest.raises(InvalidArgumentError):
        check_local_equivalence(p=3.0, battery=[])


def test_reverse_holder_growth():
    result = check_reverse_holder_growth()

    assert result.measured["constants_above"][-1] > result.measured["constants_above"][0]
    assert len(result.measured["constants_below"]) == 3


def test_runtime_stays_out_of_the_dump(grid_bundle, grid_dec):
    result = check_multiplicative_p2(bundle=grid_bundle, budget=2, dec=grid_dec)

    assert result.runtime >= 0
    assert "runtime" not in result.model_dump()


@pytest.mark.slow
def test_connected_sum_growth():
    result = check_connected_sum_growth(n_dim=2, p=4.0, sizes=(8, 16, 32))

    assert len(result.measured["constants"]) == 3
    assert min(result.measured["growth"]) >= 0.10
    assert result.measured["control_spread"] <= 0.30
    assert result.measured["sheet_spread"] <= 0.30
    assert result.verdict is Verdict.PASS
    with pytest.raises(InvalidArgumentError):
        check_connected_sum_growth(p=1.5)
