import hashlib
import json
from typing import Any

import numpy as np

from src.models.models import OperatorBundle
from src.models.models import SpectralDecomposition
from src.models.models import WeightedGraph


def array_digest(array: np.ndarray) -> str:
    data: np.ndarray = np.ascontiguousarray(array, dtype=np.float64)
    return hashlib.sha256(data.tobytes()).hexdigest()


def payload_digest(data: Any) -> str:
    """sha256 канонической JSON-записи: ключи отсортированы, без пробелов"""

    concatenated_values: str = json.dumps(
        data, sort_keys=True, separators=(",", ":"), default=_default
    )
    return hashlib.sha256(concatenated_values.encode("utf-8")).hexdigest()


def graph_digest(graph: WeightedGraph) -> str:
    digest = hashlib.sha256()
    for part in (graph.measure, graph.conductance):
        digest.update(np.ascontiguousarray(part, dtype=np.float64).tobytes())
    digest.update(np.ascontiguousarray(graph.edges, dtype=np.int64).tobytes())
    digest.update(np.ascontiguousarray(graph.boundary, dtype=np.uint8).tobytes())
    return digest.hexdigest()


def bundle_digest(bundle: OperatorBundle) -> str:
    digest = hashlib.sha256()
    digest.update(graph_digest(bundle.graph).encode("utf-8"))
    digest.update(bundle.form.value.encode("utf-8"))
    digest.update(np.ascontiguousarray(bundle.potential, dtype=np.float64).tobytes())
    digest.update(np.ascontiguousarray(bundle.stiffness.diagonal(), dtype=np.float64).tobytes())
    if bundle.coefficients is not None:
        digest.update(
            np.ascontiguousarray(bundle.coefficients.edge_coefficients, dtype=np.float64).tobytes()
        )
    return digest.hexdigest()


def decomposition_digest(dec: SpectralDecomposition) -> str:
    return array_digest(np.concatenate([dec.eigenvalues, dec.eigenvectors.ravel()]))


def _default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"cannot digest {type(value).__name__}")
