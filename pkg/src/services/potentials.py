import logging
from dataclasses import dataclass
from typing import Sequence
from typing import Tuple

import numpy as np

from src.errors import InvalidArgumentError
from src.models.models import WeightedGraph

logger = logging.getLogger(__name__)

REVERSE_HOLDER_CENTERS: int = 16


@dataclass(frozen=True)
class ReverseHolderEstimate:
    """
    Оценка константы класса B_q по конечному набору шаров

    Атрибуты:
    constant (float): Максимум (avg_B V^q)^{1/q} / avg_B V по шарам (inf, если avg_B V = 0 < avg_B V^q);
    worst_center (int): Индекс вершины-центра худшего шара;
    worst_radius (float): Радиус худшего шара;
    balls (int): Число проверенных шаров
    """

    constant: float
    worst_center: int
    worst_radius: float
    balls: int


def zero_potential(graph: WeightedGraph) -> np.ndarray:
    return np.zeros(graph.n_vertices)


def constant_potential(graph: WeightedGraph, value: float) -> np.ndarray:
    if value < 0:
        raise InvalidArgumentError("constant potential must be nonnegative")
    return np.full(graph.n_vertices, float(value))


def radial_power_potential(graph: WeightedGraph, exponent: float) -> np.ndarray:
    """V(x) = |x|^{−exponent} по евклидовой норме координат вершины"""

    if graph.positions is None:
        raise InvalidArgumentError("radial potential needs vertex positions")
    radius: np.ndarray = np.linalg.norm(graph.positions, axis=1)
    if np.any(radius <= 0) and exponent > 0:
        raise InvalidArgumentError("radial potential is singular at a vertex placed at the origin")
    return np.power(radius, -float(exponent))


def random_potential(graph: WeightedGraph, high: float, seed: int) -> np.ndarray:
    if high < 0:
        raise InvalidArgumentError("random potential bound must be nonnegative")
    rng: np.random.Generator = np.random.default_rng(np.random.SeedSequence(seed))
    return rng.uniform(low=0.0, high=high, size=graph.n_vertices)


def reverse_holder_centers(graph: WeightedGraph, count: int = REVERSE_HOLDER_CENTERS) -> np.ndarray:
    """Решётка из count равномерно расположенных индексов вершин, включая индекс 0"""

    positions: np.ndarray = np.linspace(0, graph.n_vertices - 1, num=min(count, graph.n_vertices))
    return np.unique(np.round(positions).astype(np.int64))


def check_reverse_holder(
    graph: WeightedGraph,
    V: np.ndarray,
    q: float,
    ball_radii: Sequence[float],
    centers: int = REVERSE_HOLDER_CENTERS,
) -> ReverseHolderEstimate:
    """
    Максимум по шарам B(c, r) отношения (avg_B V^q)^{1/q} / avg_B V, средние взвешены
    мерой. Центры берутся из фиксированной решётки индексов; 0/0 считается равным 1
    """

    if graph.positions is None:
        raise InvalidArgumentError("reverse Hölder check needs vertex positions")
    if not q > 1:
        raise InvalidArgumentError(f"q must exceed 1, got {q}")
    if not ball_radii:
        raise InvalidArgumentError("at least one ball radius is required")

    V = np.asarray(V, dtype=np.float64).reshape(-1)
    if V.size != graph.n_vertices:
        raise InvalidArgumentError("potential must have one entry per graph vertex")
    if np.any(V < 0):
        raise InvalidArgumentError("potential must be nonnegative")

    worst: Tuple[float, int, float] = (-np.inf, -1, 0.0)
    balls: int = 0
    for center in reverse_holder_centers(graph=graph, count=centers):
        distance: np.ndarray = np.linalg.norm(graph.positions - graph.positions[center], axis=1)
        for radius in ball_radii:
            inside: np.ndarray = distance <= radius
            weights: np.ndarray = graph.measure[inside]
            total: float = float(weights.sum())
            mean: float = float(np.sum(weights * V[inside])) / total
            q_mean: float = (float(np.sum(weights * V[inside] ** q)) / total) ** (1.0 / q)

            if mean > 0:
                ratio: float = q_mean / mean
            elif q_mean > 0:
                ratio = np.inf
            else:
                ratio = 1.0
            balls += 1
            if ratio > worst[0]:
                worst = (ratio, int(center), float(radius))

    logger.debug("reverse Hölder q=%g on %s: %g over %d balls", q, graph.label, worst[0], balls)
    return ReverseHolderEstimate(
        constant=worst[0], worst_center=worst[1], worst_radius=worst[2], balls=balls
    )
