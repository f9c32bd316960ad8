import logging
from typing import Callable
from typing import Optional
from typing import Union

import numpy as np
from scipy import sparse

from src.errors import InvalidArgumentError
from src.errors import UnsupportedError
from src.models.models import CoefficientField
from src.models.models import GammaChannel
from src.models.models import GammaOperator
from src.models.models import OperatorBundle
from src.models.models import OperatorForm
from src.models.models import WeightedGraph

logger = logging.getLogger(__name__)

PotentialInput = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]
MatrixField = Callable[[np.ndarray], np.ndarray]


def attach_potential(graph: WeightedGraph, V: PotentialInput = 0.0) -> OperatorBundle:
    """
    Собирает L = Δ_G + V. Потенциал задаётся числом, вектором на всех вершинах графа,
    вектором на активных вершинах или функцией от координат вершин
    """

    potential: np.ndarray = resolve_potential(graph=graph, V=V)
    return assemble_bundle(
        graph=graph,
        conductance=graph.conductance,
        potential=potential,
        form=OperatorForm.SCHRODINGER,
    )


def attach_divergence_form(grid: WeightedGraph, A: CoefficientField) -> OperatorBundle:
    """L = −div(A∇) на сетке: проводимости рёбер умножаются на a_uv, V = 0"""

    if not grid.is_grid:
        raise UnsupportedError(
            f"divergence form needs a grid-built graph, {grid.label} is not one"
        )
    if A.edge_coefficients.shape != (grid.n_edges,):
        raise InvalidArgumentError("coefficient field must have one entry per edge")

    active_count: int = int(np.count_nonzero(~grid.boundary))
    return assemble_bundle(
        graph=grid,
        conductance=grid.conductance * A.edge_coefficients,
        potential=np.zeros(active_count),
        form=OperatorForm.DIVERGENCE,
        coefficients=A,
    )


def resolve_potential(graph: WeightedGraph, V: PotentialInput) -> np.ndarray:
    active: np.ndarray = np.flatnonzero(~graph.boundary)

    if callable(V):
        if graph.positions is None:
            raise InvalidArgumentError("a potential closure needs vertex positions")
        values: np.ndarray = np.asarray(V(graph.positions), dtype=np.float64).reshape(-1)
    elif np.isscalar(V):
        values = np.full(graph.n_vertices, float(V))
    else:
        values = np.asarray(V, dtype=np.float64).reshape(-1)

    if values.size == graph.n_vertices:
        values = values[active]
    elif values.size != active.size:
        raise InvalidArgumentError(
            f"potential has {values.size} entries, expected {graph.n_vertices} or {active.size}"
        )
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("potential must be finite on every active vertex")
    if np.any(values < 0):
        raise InvalidArgumentError("potential must be nonnegative (V >= 0)")
    return values


def assemble_bundle(
    graph: WeightedGraph,
    conductance: np.ndarray,
    potential: np.ndarray,
    form: OperatorForm,
    coefficients: Optional[CoefficientField] = None,
) -> OperatorBundle:
    """
    K = Σ_{внутр. рёбра} w(e_u − e_v)(e_u − e_v)ᵀ + Σ_{рёбра к границе} w e_x e_xᵀ,
    L = M⁻¹K + diag(V). Оператор ∇ строится так, что Σ μ|∇f|² = fᵀKf точно
    """

    active: np.ndarray = np.flatnonzero(~graph.boundary)
    n: int = active.size
    position: np.ndarray = np.full(graph.n_vertices, -1, dtype=np.int64)
    position[active] = np.arange(n)
    measure: np.ndarray = graph.measure[active]

    ends: np.ndarray = position[graph.edges]
    interior: np.ndarray = (ends >= 0).all(axis=1)
    boundary_edge: np.ndarray = (ends >= 0).sum(axis=1) == 1

    u: np.ndarray = ends[interior, 0]
    v: np.ndarray = ends[interior, 1]
    w: np.ndarray = conductance[interior]
    x: np.ndarray = ends[boundary_edge].max(axis=1)
    wb: np.ndarray = conductance[boundary_edge]

    stiffness: sparse.csr_matrix = sparse.csr_matrix(
        (
            np.concatenate([w, w, -w, -w, wb]),
            (np.concatenate([u, v, u, v, x]), np.concatenate([u, v, v, u, x])),
        ),
        shape=(n, n),
    )
    matrix_L: sparse.csr_matrix = (
        sparse.diags(1.0 / measure) @ stiffness + sparse.diags(potential)
    ).tocsr()

    m: int = u.size
    forward: np.ndarray = np.sqrt(w / (2.0 * measure[u]))
    backward: np.ndarray = np.sqrt(w / (2.0 * measure[v]))
    outward: np.ndarray = np.sqrt(wb / measure[x])
    rows_u: np.ndarray = np.arange(m)
    rows_v: np.ndarray = m + np.arange(m)
    rows_b: np.ndarray = 2 * m + np.arange(x.size)
    gradient_matrix: sparse.csr_matrix = sparse.csr_matrix(
        (
            np.concatenate([forward, -forward, backward, -backward, -outward]),
            (
                np.concatenate([rows_u, rows_u, rows_v, rows_v, rows_b]),
                np.concatenate([v, u, u, v, x]),
            ),
        ),
        shape=(2 * m + x.size, n),
    )
    gradient: GammaOperator = GammaOperator(
        matrix=gradient_matrix,
        owner=np.concatenate([u, v, x]),
        n_vertices=n,
        channel=GammaChannel.GRADIENT,
    )

    logger.debug(
        "assembled %s on %s: %d active vertices, %d interior edges, %d boundary edges",
        form.value,
        graph.label,
        n,
        m,
        x.size,
    )
    return OperatorBundle(
        graph=graph,
        potential=potential,
        active=active,
        measure=measure,
        stiffness=stiffness,
        matrix_L=matrix_L,
        gradient=gradient,
        form=form,
        coefficients=coefficients,
    )


def gradient_field(bundle: OperatorBundle, f: np.ndarray) -> np.ndarray:
    """|∇f|(x) по формуле carré du champ на активных вершинах"""

    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] != bundle.n:
        raise InvalidArgumentError(
            f"vertex function has {f.shape[0]} entries, bundle has {bundle.n} active vertices"
        )
    return bundle.gradient.field(f)


def constant_coefficients(graph: WeightedGraph, c: float = 1.0) -> CoefficientField:
    return CoefficientField(edge_coefficients=np.full(graph.n_edges, float(c)), ellipticity=c)


def checkerboard_coefficients(
    graph: WeightedGraph, low: float = 1.0, high: float = 10.0, block: int = 2
) -> CoefficientField:
    """
    Шахматное поле a(x) ∈ {low, high} с клетками block×block; коэффициент ребра
    равен среднему значений в его концах
    """

    if not graph.is_grid:
        raise UnsupportedError("checkerboard coefficients need a grid-built graph")
    if not 0 < low <= high:
        raise InvalidArgumentError("checkerboard values must satisfy 0 < low <= high")
    if block < 1:
        raise InvalidArgumentError("checkerboard block must be positive")

    cells: np.ndarray = np.stack(
        np.unravel_index(np.arange(graph.n_vertices), graph.grid_shape), axis=1
    )
    parity: np.ndarray = (cells // block).sum(axis=1) % 2
    vertex_values: np.ndarray = np.where(parity == 0, low, high)
    edge_values: np.ndarray = vertex_values[graph.edges].mean(axis=1)
    return CoefficientField(edge_coefficients=edge_values, ellipticity=low)


def coefficient_field_from_matrix(graph: WeightedGraph, A: MatrixField) -> CoefficientField:
    """
    Поле коэффициентов из матричной функции A(x) формы (n, d, d): коэффициент ребра оси k
    равен среднему A_kk в его концах, ν равна наименьшему собственному значению
    симметризованной A по вершинам
    """

    if not graph.is_grid:
        raise UnsupportedError("matrix coefficients need a grid-built graph")

    matrices: np.ndarray = np.asarray(A(graph.positions), dtype=np.float64)
    d: int = len(graph.grid_shape)
    if matrices.shape != (graph.n_vertices, d, d):
        raise InvalidArgumentError(
            f"A(x) must have shape {(graph.n_vertices, d, d)}, got {matrices.shape}"
        )

    symmetric: np.ndarray = 0.5 * (matrices + np.transpose(matrices, (0, 2, 1)))
    ellipticity: float = float(np.linalg.eigvalsh(symmetric)[:, 0].min())
    if not ellipticity > 0:
        raise InvalidArgumentError("A(x) is not uniformly elliptic")

    diagonal: np.ndarray = symmetric[:, graph.edge_axis, graph.edge_axis]
    heads: np.ndarray = diagonal[graph.edges[:, 0], np.arange(graph.n_edges)]
    tails: np.ndarray = diagonal[graph.edges[:, 1], np.arange(graph.n_edges)]
    return CoefficientField(edge_coefficients=0.5 * (heads + tails), ellipticity=ellipticity)
