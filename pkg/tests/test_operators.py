import numpy as np
import pytest

from src.errors import InvalidArgumentError
from src.errors import UnsupportedError
from src.models.models import GammaChannel
from src.models.models import OperatorForm
from src.services.graphs import build_connected_sum
from src.services.graphs import build_grid
from src.services.operators import attach_divergence_form
from src.services.operators import attach_potential
from src.services.operators import checkerboard_coefficients
from src.services.operators import coefficient_field_from_matrix
from src.services.operators import constant_coefficients
from src.services.operators import gradient_field


def _close(left: float, right: float) -> bool:
    return abs(left - right) <= 1e-10 * (1.0 + abs(left) + abs(right))


@pytest.mark.parametrize(
    "bundle_name", ["path_bundle", "grid_bundle", "dirichlet_bundle", "sum_bundle", "checkerboard_bundle"]
)
def test_integration_by_parts(bundle_name, request, rng):
    bundle = request.getfixturevalue(bundle_name)
    f = rng.standard_normal(bundle.n)

    carre_du_champ = float(np.sum(bundle.measure * bundle.gamma(GammaChannel.BOTH).field(f) ** 2))

    assert _close(bundle.quadratic_form(f), carre_du_champ)
    assert _close(bundle.inner(bundle.apply(f), f), bundle.quadratic_form(f))


def test_operator_is_symmetric_in_the_measure(grid_bundle, rng):
    f = rng.standard_normal(grid_bundle.n)
    g = rng.standard_normal(grid_bundle.n)

    assert _close(grid_bundle.inner(grid_bundle.apply(f), g), grid_bundle.inner(f, grid_bundle.apply(g)))


def test_constants_are_harmonic_without_potential(path_bundle):
    assert np.allclose(path_bundle.apply(np.ones(path_bundle.n)), 0.0)
    assert np.allclose(gradient_field(path_bundle, np.ones(path_bundle.n)), 0.0)


def test_dirichlet_bundle_keeps_interior_vertices(dirichlet_bundle):
    assert dirichlet_bundle.n == 16
    assert dirichlet_bundle.potential.shape == (16,)
    assert not dirichlet_bundle.graph.boundary[dirichlet_bundle.active].any()


def test_potential_forms():
    graph = build_grid(dims=(4, 4))

    scalar = attach_potential(graph=graph, V=2.0)
    closure = attach_potential(graph=graph, V=lambda x: np.sum(x * x, axis=1))

    assert np.allclose(scalar.potential, 2.0)
    assert closure.potential[0] == 0.0
    assert closure.potential[-1] == pytest.approx(18.0)


@pytest.mark.parametrize("V", [-1.0, np.ones(5), np.array([np.inf] * 16)])
def test_invalid_potential_rejected(V):
    with pytest.raises(InvalidArgumentError):
        attach_potential(graph=build_grid(dims=(4, 4)), V=V)


def test_divergence_form_needs_grid():
    graph = build_connected_sum(n_dim=2, side=8, neck_width=1)

    with pytest.raises(UnsupportedError):
        attach_divergence_form(grid=graph, A=constant_coefficients(graph=graph))


def test_divergence_form_with_unit_coefficients_matches_laplacian(rng):
    graph = build_grid(dims=(5, 5))
    laplacian = attach_potential(graph=graph)
    divergence = attach_divergence_form(grid=graph, A=constant_coefficients(graph=graph))
    f = rng.standard_normal(divergence.n)

    assert divergence.form is OperatorForm.DIVERGENCE
    assert np.allclose(divergence.apply(f), laplacian.apply(f))


def test_checkerboard_coefficients_are_elliptic(checkerboard_bundle):
    coefficients = checkerboard_bundle.coefficients

    assert coefficients.ellipticity == 1.0
    assert coefficients.edge_coefficients.min() >= 1.0
    assert coefficients.edge_coefficients.max() <= 10.0
    assert set(np.unique(coefficients.edge_coefficients)) <= {1.0, 5.5, 10.0}
    assert not checkerboard_bundle.potential.any()


def test_matrix_coefficients_use_axis_diagonal():
    graph = build_grid(dims=(4, 4))
    field = coefficient_field_from_matrix(
        graph=graph, A=lambda x: np.tile(np.diag([2.0, 3.0]), (x.shape[0], 1, 1))
    )

    assert field.ellipticity == pytest.approx(2.0)
    assert np.allclose(field.edge_coefficients[graph.edge_axis == 0], 2.0)
    assert np.allclose(field.edge_coefficients[graph.edge_axis == 1], 3.0)


def test_matrix_coefficients_reject_degenerate_field():
    graph = build_grid(dims=(4, 4))

    with pytest.raises(InvalidArgumentError):
        coefficient_field_from_matrix(graph=graph, A=lambda x: np.zeros((x.shape[0], 2, 2)))


def test_checkerboard_needs_grid():
    with pytest.raises(UnsupportedError):
        checkerboard_coefficients(graph=build_connected_sum(n_dim=2, side=8, neck_width=1))


def test_gradient_field_checks_length(grid_bundle):
    with pytest.raises(InvalidArgumentError):
        gradient_field(grid_bundle, np.ones(grid_bundle.n + 1))
