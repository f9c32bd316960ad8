import numpy as np
import pytest

from src.models.models import OperatorBundle
from src.models.models import SpectralDecomposition
from src.services.graphs import build_connected_sum
from src.services.graphs import build_grid
from src.services.graphs import build_path_graph
from src.services.operators import attach_divergence_form
from src.services.operators import attach_potential
from src.services.operators import checkerboard_coefficients
from src.services.potentials import random_potential
from src.services.spectral import decompose


@pytest.fixture(scope="session")
def path_bundle() -> OperatorBundle:
    """Путь из 8 вершин с V = 0: ядро L одномерно"""

    return attach_potential(graph=build_path_graph(n=8))


@pytest.fixture(scope="session")
def grid_bundle() -> OperatorBundle:
    """Сетка 6×6 со случайным потенциалом V ∈ [0, 1): ядра нет"""

    graph = build_grid(dims=(6, 6))
    return attach_potential(graph=graph, V=random_potential(graph=graph, high=1.0, seed=0))


@pytest.fixture(scope="session")
def dirichlet_bundle() -> OperatorBundle:
    return attach_potential(graph=build_grid(dims=(6, 6), dirichlet=True))


@pytest.fixture(scope="session")
def sum_bundle() -> OperatorBundle:
    return attach_potential(graph=build_connected_sum(n_dim=2, side=8, neck_width=1))


@pytest.fixture(scope="session")
def checkerboard_bundle() -> OperatorBundle:
    graph = build_grid(dims=(6, 6))
    return attach_divergence_form(grid=graph, A=checkerboard_coefficients(graph=graph))


@pytest.fixture(scope="session")
def path_dec(path_bundle: OperatorBundle) -> SpectralDecomposition:
    return decompose(bundle=path_bundle)


@pytest.fixture(scope="session")
def grid_dec(grid_bundle: OperatorBundle) -> SpectralDecomposition:
    return decompose(bundle=grid_bundle)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
