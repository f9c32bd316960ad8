import csv
import json
import logging
import os
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
from pydantic import BaseModel

from src import __version__
from src.errors import InvalidArgumentError
from src.models.models import CoefficientField
from src.models.models import OperatorBundle
from src.models.models import OperatorForm
from src.models.models import SpectralDecomposition
from src.models.models import WeightedGraph
from src.services.hashing import bundle_digest
from src.services.operators import attach_divergence_form
from src.services.operators import attach_potential
from src.services.spectral import decompose

logger = logging.getLogger(__name__)

DOCUMENT_VERSION: int = 1
REPORT_PREFIX: Sequence[str] = ("tool_version", "config_digest")


class BaseDAL:
    """
    Базовый класс для всех DAL (Data Access Layer) классов в проекте
    (то есть классов, читающих и пишущих файлы лаборатории)
    """

    def __init__(self, root: str) -> None:
        self.root: str = root

    def path(self, name: str) -> str:
        return os.path.join(self.root, name)

    def ensure_root(self) -> None:
        os.makedirs(self.root, exist_ok=True)


def _optional_list(array: Optional[np.ndarray]) -> Optional[List[Any]]:
    return None if array is None else np.asarray(array).tolist()


class GraphDAL(BaseDAL):
    """DAL класс для JSON-документов графов и операторов"""

    @staticmethod
    def serialize_graph(graph: WeightedGraph) -> Dict[str, Any]:
        return {
            "document_version": DOCUMENT_VERSION,
            "label": graph.label,
            "measure": graph.measure.tolist(),
            "edges": graph.edges.tolist(),
            "conductance": graph.conductance.tolist(),
            "positions": _optional_list(graph.positions),
            "boundary": graph.boundary.tolist(),
            "grid_shape": list(graph.grid_shape) if graph.grid_shape is not None else None,
            "spacing": graph.spacing,
            "edge_axis": _optional_list(graph.edge_axis),
        }

    @staticmethod
    def load_graph(document: Dict[str, Any]) -> WeightedGraph:
        if document.get("document_version") != DOCUMENT_VERSION:
            raise InvalidArgumentError(
                f"unsupported graph document version {document.get('document_version')!r}"
            )
        try:
            return WeightedGraph(
                measure=np.asarray(document["measure"], dtype=np.float64),
                edges=np.asarray(document["edges"], dtype=np.int64).reshape(-1, 2),
                conductance=np.asarray(document["conductance"], dtype=np.float64),
                positions=document.get("positions"),
                boundary=np.asarray(document["boundary"], dtype=bool),
                grid_shape=document.get("grid_shape"),
                spacing=document.get("spacing"),
                edge_axis=document.get("edge_axis"),
                label=document.get("label", "graph"),
            )
        except KeyError as exception:
            raise InvalidArgumentError(f"graph document lacks field {exception}") from exception

    def serialize_bundle(self, bundle: OperatorBundle) -> Dict[str, Any]:
        coefficients: Optional[Dict[str, Any]] = None
        if bundle.coefficients is not None:
            coefficients = {
                "edge_coefficients": bundle.coefficients.edge_coefficients.tolist(),
                "ellipticity": bundle.coefficients.ellipticity,
            }
        return {
            "document_version": DOCUMENT_VERSION,
            "graph": self.serialize_graph(graph=bundle.graph),
            "form": bundle.form.value,
            "potential": bundle.potential.tolist(),
            "coefficients": coefficients,
            "bundle_digest": bundle_digest(bundle),
        }

    def load_bundle(self, document: Dict[str, Any]) -> OperatorBundle:
        graph: WeightedGraph = self.load_graph(document=document["graph"])
        if OperatorForm(document["form"]) is OperatorForm.DIVERGENCE:
            coefficients: Dict[str, Any] = document["coefficients"]
            return attach_divergence_form(
                grid=graph,
                A=CoefficientField(
                    edge_coefficients=np.asarray(coefficients["edge_coefficients"]),
                    ellipticity=float(coefficients["ellipticity"]),
                ),
            )
        return attach_potential(graph=graph, V=np.asarray(document["potential"], dtype=np.float64))

    def save_bundle(self, bundle: OperatorBundle, name: str) -> str:
        self.ensure_root()
        target: str = self.path(name)
        with open(target, "w", encoding="utf-8") as file:
            json.dump(self.serialize_bundle(bundle=bundle), file, sort_keys=True, indent=2)
        return target

    def read_bundle(self, name: str) -> OperatorBundle:
        with open(self.path(name), encoding="utf-8") as file:
            return self.load_bundle(document=json.load(file))


class DecompositionCacheDAL(BaseDAL):
    """DAL класс для кэша спектральных разложений (.npz) с ключом по хешу оператора"""

    def key(self, bundle: OperatorBundle) -> str:
        return f"{bundle_digest(bundle)}.npz"

    def get(self, bundle: OperatorBundle) -> Optional[SpectralDecomposition]:
        target: str = self.path(self.key(bundle))
        if not os.path.exists(target):
            logger.debug("decomposition cache miss for %s", bundle.graph.label)
            return None
        with np.load(target) as stored:
            logger.debug("decomposition cache hit for %s", bundle.graph.label)
            return SpectralDecomposition(
                eigenvalues=stored["eigenvalues"],
                eigenvectors=stored["eigenvectors"],
                measure=stored["measure"],
                kernel_tolerance=float(stored["kernel_tolerance"]),
            )

    def put(self, bundle: OperatorBundle, dec: SpectralDecomposition) -> str:
        self.ensure_root()
        target: str = self.path(self.key(bundle))
        np.savez(
            target,
            eigenvalues=dec.eigenvalues,
            eigenvectors=dec.eigenvectors,
            measure=dec.measure,
            kernel_tolerance=np.float64(dec.kernel_tolerance),
        )
        return target

    def decompose(self, bundle: OperatorBundle, cap: Optional[int] = None) -> SpectralDecomposition:
        cached: Optional[SpectralDecomposition] = self.get(bundle=bundle)
        if cached is not None:
            return cached
        dec: SpectralDecomposition = decompose(bundle=bundle, cap=cap)
        self.put(bundle=bundle, dec=dec)
        return dec


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "; ".join(str(item) for item in value)
    if hasattr(value, "value"):
        return value.value
    if value is None:
        return ""
    return value


class ReportDAL(BaseDAL):
    """
    DAL класс для отчётов: CSV с зафиксированным порядком столбцов и JSON с
    отсортированными ключами. Каждый отчёт несёт версию инструмента и хеш конфигурации
    """

    def __init__(self, root: str, config_digest: str) -> None:
        super().__init__(root=root)
        self.config_digest: str = config_digest

    def write_csv(self, name: str, columns: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
        self.ensure_root()
        target: str = self.path(name)
        header: List[str] = list(REPORT_PREFIX) + list(columns)
        with open(target, "w", newline="", encoding="utf-8") as file:
            writer: csv.DictWriter = csv.DictWriter(file, fieldnames=header, extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                record: Dict[str, Any] = {column: _cell(row.get(column)) for column in columns}
                record["tool_version"] = __version__
                record["config_digest"] = self.config_digest
                writer.writerow(record)
        logger.debug("wrote %d rows to %s", len(rows), target)
        return target

    def write_structured(self, name: str, payload: Dict[str, Any]) -> str:
        self.ensure_root()
        target: str = self.path(name)
        document: Dict[str, Any] = {
            "tool_version": __version__,
            "config_digest": self.config_digest,
            **payload,
        }
        with open(target, "w", encoding="utf-8") as file:
            json.dump(document, file, sort_keys=True, indent=2, default=str)
            file.write("\n")
        return target

    def write_records(
        self,
        stem: str,
        records: Sequence[BaseModel],
        columns: Sequence[str],
        output_format: str = "both",
        extra: Optional[Dict[str, Any]] = None,
    ) -> List[str]:
        """Пишет записи в CSV и/или JSON по формату csv, structured или both"""

        if output_format not in ("csv", "structured", "both"):
            raise InvalidArgumentError(f"unknown output format {output_format!r}")
        dumped: List[Dict[str, Any]] = [record.model_dump(mode="json") for record in records]
        written: List[str] = []
        if output_format in ("csv", "both"):
            written.append(self.write_csv(name=f"{stem}.csv", columns=columns, rows=dumped))
        if output_format in ("structured", "both"):
            payload: Dict[str, Any] = {"records": dumped, **(extra or {})}
            written.append(self.write_structured(name=f"{stem}.json", payload=payload))
        return written
