import logging
from typing import List
from typing import Sequence
from typing import Tuple

import networkx as nx
import numpy as np

from src.errors import InvalidArgumentError
from src.models.models import WeightedGraph

logger = logging.getLogger(__name__)


def build_path_graph(n: int, h: float = 1.0) -> WeightedGraph:
    """Путь P_n с шагом h: мера h в каждой вершине, проводимость рёбер 1/h"""

    if n < 2:
        raise InvalidArgumentError(f"path graph needs at least 2 vertices, got {n}")
    if not h > 0:
        raise InvalidArgumentError(f"spacing must be positive, got {h}")
    graph: WeightedGraph = build_grid(dims=(n,), h=h, dirichlet=False)
    return _relabel(graph=graph, label=f"path({n},{h:g})")


def build_grid(
    dims: Sequence[int], h: float = 1.0, dirichlet: bool = False
) -> WeightedGraph:
    """
    Тензорная сетка с шагом h в размерности d = len(dims): мера вершины h^d,
    проводимость ребра h^{d−2}. При dirichlet вершины граничного слоя помечаются
    как граничные
    """

    dims = tuple(int(size) for size in dims)
    if not dims:
        raise InvalidArgumentError("grid dimensions must be nonempty")
    if any(size < 2 for size in dims):
        raise InvalidArgumentError(f"every grid dimension must be at least 2, got {dims}")
    if not h > 0:
        raise InvalidArgumentError(f"spacing must be positive, got {h}")
    if dirichlet and any(size < 3 for size in dims):
        raise InvalidArgumentError("a Dirichlet grid needs at least 3 points per axis")

    d: int = len(dims)
    n: int = int(np.prod(dims))
    index: np.ndarray = np.arange(n).reshape(dims)

    edge_blocks: List[np.ndarray] = []
    axis_blocks: List[np.ndarray] = []
    for axis in range(d):
        head: np.ndarray = np.take(index, np.arange(dims[axis] - 1), axis=axis).ravel()
        tail: np.ndarray = np.take(index, np.arange(1, dims[axis]), axis=axis).ravel()
        edge_blocks.append(np.stack([head, tail], axis=1))
        axis_blocks.append(np.full(head.size, axis))
    edges: np.ndarray = np.concatenate(edge_blocks)

    coordinates: np.ndarray = np.stack(
        np.unravel_index(np.arange(n), dims), axis=1
    ).astype(np.float64)
    boundary: np.ndarray = np.zeros(n, dtype=bool)
    if dirichlet:
        boundary = np.any(
            (coordinates == 0) | (coordinates == np.array(dims) - 1), axis=1
        )

    return WeightedGraph(
        measure=np.full(n, h**d),
        edges=edges,
        conductance=np.full(edges.shape[0], h ** (d - 2)),
        positions=coordinates * h,
        boundary=boundary,
        grid_shape=dims,
        spacing=h,
        edge_axis=np.concatenate(axis_blocks),
        label=f"grid({'x'.join(map(str, dims))},{h:g}{',dirichlet' if dirichlet else ''})",
    )


def build_radial_graph(n_dim: int, r_max: float, m: int) -> WeightedGraph:
    """
    Радиальная цепочка r_i = i·r_max/m, i = 1..m: мера r_i^{n−1}Δr, проводимость
    ((r_i + r_{i+1})/2)^{n−1}/Δr. Вершины в нуле нет, внутренний конец свободный
    """

    if n_dim < 2:
        raise InvalidArgumentError(f"radial graph needs n_dim >= 2, got {n_dim}")
    if m < 3:
        raise InvalidArgumentError(f"radial graph needs m >= 3, got {m}")
    if not r_max > 0:
        raise InvalidArgumentError(f"r_max must be positive, got {r_max}")

    step: float = r_max / m
    radii: np.ndarray = step * np.arange(1, m + 1)
    midpoints: np.ndarray = 0.5 * (radii[:-1] + radii[1:])
    edges: np.ndarray = np.stack([np.arange(m - 1), np.arange(1, m)], axis=1)

    return WeightedGraph(
        measure=radii ** (n_dim - 1) * step,
        edges=edges,
        conductance=midpoints ** (n_dim - 1) / step,
        positions=radii[:, None],
        spacing=step,
        label=f"radial({n_dim},{r_max:g},{m})",
    )


def build_connected_sum(n_dim: int, side: int, neck_width: int) -> WeightedGraph:
    """
    Связная сумма двух n-мерных листов со стороной side. Центральный блок со стороной
    neck_width вырезается из каждого листа, и два листа склеиваются по нему: вершины
    блока общие. Число вершин 2·(side^n − neck^n) + neck^n; мера и проводимости единичные.
    Последняя координата positions равна 0 на первом листе, 1 на втором и 0.5 на горловине
    """

    if n_dim < 2:
        raise InvalidArgumentError(f"connected sum needs n_dim >= 2, got {n_dim}")
    if neck_width < 1:
        raise InvalidArgumentError(f"neck width must be positive, got {neck_width}")
    if side < 4 * neck_width:
        raise InvalidArgumentError(
            f"neck too large: side {side} must be at least 4 * neck_width = {4 * neck_width}"
        )

    sheet: WeightedGraph = build_grid(dims=(side,) * n_dim, h=1.0, dirichlet=False)
    per_sheet: int = sheet.n_vertices
    coordinates: np.ndarray = sheet.positions
    start: int = (side - neck_width) // 2
    in_neck: np.ndarray = np.all(
        (coordinates >= start) & (coordinates < start + neck_width), axis=1
    )

    second: np.ndarray = np.empty(per_sheet, dtype=np.int64)
    second[in_neck] = np.flatnonzero(in_neck)
    outside: np.ndarray = np.flatnonzero(~in_neck)
    second[outside] = per_sheet + np.arange(outside.size)

    mapped: np.ndarray = second[sheet.edges]
    inside_both: np.ndarray = in_neck[sheet.edges].all(axis=1)
    edges: np.ndarray = np.concatenate([sheet.edges, mapped[~inside_both]])

    n: int = per_sheet + outside.size
    sheet_flag: np.ndarray = np.concatenate(
        [np.where(in_neck, 0.5, 0.0), np.ones(outside.size)]
    )
    centred: np.ndarray = coordinates - 0.5 * (side - 1)
    positions: np.ndarray = np.concatenate(
        [
            np.column_stack([centred, sheet_flag[:per_sheet]]),
            np.column_stack([centred[outside], sheet_flag[per_sheet:]]),
        ]
    )

    graph: WeightedGraph = WeightedGraph(
        measure=np.ones(n),
        edges=edges,
        conductance=np.ones(edges.shape[0]),
        positions=positions,
        label=f"connected-sum({n_dim},{side},{neck_width})",
    )
    logger.debug("connected sum %s: %d vertices, %d edges", graph.label, n, graph.n_edges)
    return graph


def graph_components(graph: WeightedGraph) -> int:
    return graph.component_count()


def component_sizes(graph: WeightedGraph) -> Tuple[int, ...]:
    return tuple(
        sorted((len(part) for part in nx.connected_components(graph.to_networkx())), reverse=True)
    )


def _relabel(graph: WeightedGraph, label: str) -> WeightedGraph:
    return WeightedGraph(
        measure=graph.measure,
        edges=graph.edges,
        conductance=graph.conductance,
        positions=graph.positions,
        boundary=graph.boundary,
        grid_shape=graph.grid_shape,
        spacing=graph.spacing,
        edge_axis=graph.edge_axis,
        label=label,
    )
