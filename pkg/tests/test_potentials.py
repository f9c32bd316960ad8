import numpy as np
import pytest

from src.errors import InvalidArgumentError
from src.services.graphs import build_grid
from src.services.graphs import build_radial_graph
from src.services.potentials import check_reverse_holder
from src.services.potentials import constant_potential
from src.services.potentials import radial_power_potential
from src.services.potentials import random_potential
from src.services.potentials import reverse_holder_centers
from src.services.potentials import zero_potential


def test_constant_potential_is_reverse_holder_with_constant_one():
    graph = build_grid(dims=(8, 8))
    estimate = check_reverse_holder(
        graph=graph, V=constant_potential(graph=graph, value=3.0), q=2.0, ball_radii=(1.0, 2.5)
    )

    assert estimate.constant == pytest.approx(1.0)
    assert estimate.balls == 16 * 2


def test_zero_potential_counts_as_one():
    graph = build_grid(dims=(5, 5))
    estimate = check_reverse_holder(graph=graph, V=zero_potential(graph=graph), q=3.0, ball_radii=(1.0,))

    assert estimate.constant == 1.0


def test_random_potential_constant_is_at_least_one():
    graph = build_grid(dims=(8, 8))
    V = random_potential(graph=graph, high=1.0, seed=3)
    estimate = check_reverse_holder(graph=graph, V=V, q=2.0, ball_radii=(1.0, 3.0))

    assert estimate.constant >= 1.0 - 1e-12
    assert 0 <= estimate.worst_center < graph.n_vertices


def test_random_potential_is_reproducible():
    graph = build_grid(dims=(4, 4))

    assert np.array_equal(
        random_potential(graph=graph, high=2.0, seed=5), random_potential(graph=graph, high=2.0, seed=5)
    )


def test_radial_power_potential():
    graph = build_radial_graph(n_dim=3, r_max=3.0, m=30)
    V = radial_power_potential(graph=graph, exponent=1.5)

    assert np.allclose(V, graph.positions[:, 0] ** -1.5)


def test_radial_power_rejects_vertex_at_origin():
    with pytest.raises(InvalidArgumentError):
        radial_power_potential(graph=build_grid(dims=(4, 4)), exponent=1.0)


def test_singular_potential_grows_under_refinement():
    constants = []
    for m in (100, 400):
        graph = build_radial_graph(n_dim=3, r_max=3.0, m=m)
        V = radial_power_potential(graph=graph, exponent=1.5)
        constants.append(check_reverse_holder(graph=graph, V=V, q=2.5, ball_radii=(0.25,)).constant)

    assert constants[1] > constants[0]


def test_reverse_holder_centers_include_origin_index():
    centers = reverse_holder_centers(graph=build_grid(dims=(10, 10)), count=16)

    assert centers[0] == 0
    assert centers[-1] == 99
    assert len(centers) == 16


@pytest.mark.parametrize("q, radii", [(1.0, (1.0,)), (2.0, ())])
def test_reverse_holder_rejects_bad_arguments(q, radii):
    graph = build_grid(dims=(4, 4))

    with pytest.raises(InvalidArgumentError):
        check_reverse_holder(graph=graph, V=np.ones(16), q=q, ball_radii=radii)


def test_negative_values_rejected():
    graph = build_grid(dims=(4, 4))

    with pytest.raises(InvalidArgumentError):
        constant_potential(graph=graph, value=-1.0)
    with pytest.raises(InvalidArgumentError):
        random_potential(graph=graph, high=-1.0, seed=0)
