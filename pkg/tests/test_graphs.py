import numpy as np
import pytest

from src.errors import InvalidArgumentError
from src.models.models import WeightedGraph
from src.services.graphs import build_connected_sum
from src.services.graphs import build_grid
from src.services.graphs import build_path_graph
from src.services.graphs import build_radial_graph
from src.services.graphs import component_sizes
from src.services.graphs import graph_components


def test_path_graph_weights():
    graph = build_path_graph(n=5, h=0.5)

    assert graph.n_vertices == 5
    assert graph.n_edges == 4
    assert np.allclose(graph.measure, 0.5)
    assert np.allclose(graph.conductance, 2.0)
    assert graph.label == "path(5,0.5)"
    assert graph.is_grid


def test_grid_counts_and_weights():
    graph = build_grid(dims=(4, 3))
    assert graph.n_vertices == 12
    assert graph.n_edges == 3 * 3 + 4 * 2
    assert not graph.has_dirichlet

    cube = build_grid(dims=(3, 3, 3), h=0.5)
    assert np.allclose(cube.measure, 0.125)
    assert np.allclose(cube.conductance, 0.5)
    assert cube.positions.shape == (27, 3)


def test_dirichlet_grid_marks_boundary_layer():
    graph = build_grid(dims=(5, 5), dirichlet=True)

    assert graph.has_dirichlet
    assert int(graph.boundary.sum()) == 25 - 9


def test_dirichlet_grid_needs_three_points():
    with pytest.raises(InvalidArgumentError):
        build_grid(dims=(2, 5), dirichlet=True)


@pytest.mark.parametrize(
    "dims, h",
    [((), 1.0), ((1, 4), 1.0), ((4, 4), 0.0)],
)
def test_grid_rejects_bad_arguments(dims, h):
    with pytest.raises(InvalidArgumentError):
        build_grid(dims=dims, h=h)


@pytest.mark.parametrize("side, neck", [(8, 1), (8, 2), (12, 3)])
def test_connected_sum_vertex_count(side, neck):
    graph = build_connected_sum(n_dim=2, side=side, neck_width=neck)

    assert graph.n_vertices == 2 * (side**2 - neck**2) + neck**2
    assert graph_components(graph) == 1


def test_connected_sum_edges_and_sheets():
    graph = build_connected_sum(n_dim=2, side=8, neck_width=1)
    sheet_flags = graph.positions[:, -1]

    assert graph.n_edges == 2 * (2 * 7 * 8)
    assert int(np.count_nonzero(sheet_flags == 0.5)) == 1
    assert int(np.count_nonzero(sheet_flags == 0.0)) == 63
    assert int(np.count_nonzero(sheet_flags == 1.0)) == 63


def test_connected_sum_rejects_wide_neck():
    with pytest.raises(InvalidArgumentError):
        build_connected_sum(n_dim=2, side=7, neck_width=2)


def test_radial_graph_weights():
    graph = build_radial_graph(n_dim=3, r_max=2.0, m=10)
    radii = graph.positions[:, 0]

    assert graph.n_vertices == 10
    assert graph.n_edges == 9
    assert np.allclose(radii, 0.2 * np.arange(1, 11))
    assert np.allclose(graph.measure, radii**2 * 0.2)
    assert radii.min() > 0


def test_component_sizes_of_disjoint_graph():
    graph = WeightedGraph(
        measure=np.ones(5),
        edges=np.array([[0, 1], [2, 3], [3, 4]]),
        conductance=np.ones(3),
    )

    assert graph_components(graph) == 2
    assert component_sizes(graph) == (3, 2)


@pytest.mark.parametrize(
    "measure, edges, conductance, boundary",
    [
        (np.ones(3), [[0, 0]], [1.0], None),
        (np.ones(3), [[0, 1], [1, 0]], [1.0, 1.0], None),
        (np.array([1.0, 0.0, 1.0]), [[0, 1]], [1.0], None),
        (np.ones(3), [[0, 1]], [-1.0], None),
        (np.ones(3), [[0, 5]], [1.0], None),
        (np.ones(2), [[0, 1]], [1.0], [True, True]),
    ],
)
def test_weighted_graph_validation(measure, edges, conductance, boundary):
    with pytest.raises(InvalidArgumentError):
        WeightedGraph(
            measure=measure,
            edges=np.asarray(edges),
            conductance=np.asarray(conductance),
            boundary=boundary,
        )
