"""File formats: prediction/label CSVs and JSON documents for models,
generator parameters, and reports.

Predictions are one row per instance of comma-separated 0/1 integers with no
header; lines starting with '#' are ignored. Labels are one 0/1 per line.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .datagen import (
    GaussianMixtureModel,
    GeneratorModel,
    LayeredGraphModel,
    TreeModel,
)
from .mapping import CondIndParams


class CsvFormatError(ValueError):
    """Malformed CSV input; carries the offending line number."""

    def __init__(self, path, line_number: int, message: str):
        super().__init__(f"{path}:{line_number}: {message}")
        self.path = str(path)
        self.line_number = line_number


def write_predictions_csv(path, data) -> None:
    X = np.asarray(data)
    lines = [",".join(str(int(v)) for v in row) for row in X]
    Path(path).write_text("\n".join(lines) + "\n")


def read_predictions_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path) as fh:
        for line_number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise CsvFormatError(
                    path, line_number,
                    f"expected {width} columns, found {len(fields)}",
                )
            row = []
            for field in fields:
                value = field.strip()
                if value not in ("0", "1"):
                    raise CsvFormatError(
                        path, line_number, f"expected 0 or 1, found {value!r}"
                    )
                row.append(int(value))
            rows.append(row)
    if not rows:
        raise CsvFormatError(path, 0, "no data rows")
    return np.asarray(rows, dtype=np.int8)


def write_labels_csv(path, labels) -> None:
    y = np.asarray(labels)
    Path(path).write_text("\n".join(str(int(v)) for v in y) + "\n")


def read_labels_csv(path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for line_number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line not in ("0", "1"):
                raise CsvFormatError(
                    path, line_number, f"expected 0 or 1, found {line!r}"
                )
            values.append(int(line))
    if not values:
        raise CsvFormatError(path, 0, "no labels")
    return np.asarray(values, dtype=np.int8)


def dump_json(doc: dict) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_json(path, doc: dict) -> None:
    Path(path).write_text(dump_json(doc))


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def generator_to_document(model: GeneratorModel) -> dict:
    """Serialize generator parameters, including all sampled channels."""
    if isinstance(model, CondIndParams):
        return {
            "kind": "condind",
            "psi": list(model.psi),
            "eta": list(model.eta),
            "pi": model.pi,
        }
    if isinstance(model, TreeModel):
        return {
            "kind": "tree",
            "pi": model.pi,
            "mid_channels": [list(row) for row in model.mid_channels],
            "leaf_channels": [list(row) for row in model.leaf_channels],
        }
    if isinstance(model, LayeredGraphModel):
        return {
            "kind": "layered_graph",
            "pi": model.pi,
            "adjacency": [[[bool(v) for v in row] for row in A] for A in model.adjacency],
            "psi": [[list(row) for row in P] for P in model.psi],
            "eta": [[list(row) for row in E] for E in model.eta],
        }
    if isinstance(model, GaussianMixtureModel):
        return {
            "kind": "truncated_gaussian",
            "pi": model.pi,
            "mu": list(model.mu),
            "cov": [list(row) for row in model.cov],
        }
    raise TypeError(f"unsupported generator model: {type(model).__name__}")


def generator_from_document(doc: dict) -> GeneratorModel:
    kind = doc.get("kind")
    if kind == "condind":
        return CondIndParams(
            psi=np.asarray(doc["psi"]), eta=np.asarray(doc["eta"]), pi=doc["pi"]
        )
    if kind == "tree":
        return TreeModel(
            pi=doc["pi"],
            mid_channels=np.asarray(doc["mid_channels"]),
            leaf_channels=np.asarray(doc["leaf_channels"]),
        )
    if kind == "layered_graph":
        return LayeredGraphModel(
            pi=doc["pi"],
            adjacency=tuple(np.asarray(A, dtype=bool) for A in doc["adjacency"]),
            psi=tuple(np.asarray(P) for P in doc["psi"]),
            eta=tuple(np.asarray(E) for E in doc["eta"]),
        )
    if kind == "truncated_gaussian":
        return GaussianMixtureModel(
            pi=doc["pi"], mu=np.asarray(doc["mu"]), cov=np.asarray(doc["cov"])
        )
    raise ValueError(f"unknown generator kind: {kind!r}")


def condind_to_document(theta: CondIndParams) -> dict:
    return generator_to_document(theta)


def condind_from_document(doc: dict) -> CondIndParams:
    model = generator_from_document(doc)
    if not isinstance(model, CondIndParams):
        raise ValueError("document does not hold conditional-independence parameters")
    return model
