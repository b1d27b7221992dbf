"""Matrix and report file formats.

Two interchange formats are supported everywhere: plain CSV (one matrix
row per line, no header) and a JSON document with fields
{"n", "m", "A", "B"} holding row-major nested arrays.  Readers reject
ragged rows.  Reports serialize to JSON; tabular exports are CSV with a
single header line.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .netmodel import NetworkSystem, build_system
from .stembud import StemBudSpec

__all__ = [
    "read_matrix_csv",
    "write_matrix_csv",
    "read_system_json",
    "write_system_json",
    "read_system",
    "read_stembud_spec_json",
    "write_stembud_spec_json",
    "write_records_csv",
    "write_json",
]


def read_matrix_csv(path) -> np.ndarray:
    """Matrix from headerless CSV; every row must have the same length."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue  # ignore blank lines
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise FileFormatError(f"{path}: line {lineno}: non-numeric entry") from exc
            if len(rows[-1]) != len(rows[0]):
                raise FileFormatError(
                    f"{path}: line {lineno} has {len(rows[-1])} entries, expected {len(rows[0])}"
                )
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def write_matrix_csv(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in M:
            writer.writerow([repr(float(v)) for v in row])


def _rectangular(nested, what):
    if not isinstance(nested, list) or not nested or not all(isinstance(r, list) for r in nested):
        raise FileFormatError(f"{what} must be a nonempty nested array")
    width = len(nested[0])
    for r in nested:
        if len(r) != width:
            raise FileFormatError(f"{what} has ragged rows")
    try:
        return np.array(nested, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{what} has non-numeric entries") from exc


def read_system_json(path) -> NetworkSystem:
    """System from the structured {"n", "m", "A", "B"} document."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON: {exc}") from exc
    for key in ("n", "m", "A", "B"):
        if key not in doc:
            raise FileFormatError(f"{path}: missing field {key!r}")
    A = _rectangular(doc["A"], "A")
    B = _rectangular(doc["B"], "B")
    if A.shape != (doc["n"], doc["n"]):
        raise FileFormatError(f"{path}: A shape {A.shape} does not match n={doc['n']}")
    if B.shape != (doc["n"], doc["m"]):
        raise FileFormatError(f"{path}: B shape {B.shape} does not match n x m")
    return build_system(A, B)


def write_system_json(path, sys: NetworkSystem) -> None:
    doc = {"n": sys.n, "m": sys.m, "A": sys.A.tolist(), "B": sys.B.tolist()}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def read_system(path, B_path=None) -> NetworkSystem:
    """Read a system: JSON document, or adjacency CSV plus input CSV.

    A ``.json`` suffix (or a missing B_path with JSON content) selects the
    structured format; otherwise the file is the adjacency matrix and
    B_path the input matrix.
    """
    p = Path(path)
    if p.suffix.lower() == ".json":
        return read_system_json(p)
    if B_path is None:
        raise FileFormatError("CSV systems need both the A matrix and a B matrix file")
    return build_system(read_matrix_csv(p), read_matrix_csv(B_path))


def read_stembud_spec_json(path) -> tuple[StemBudSpec, tuple]:
    """Stem-bud spec document: {n, y, stem_weights, a_yn, inputs}."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: invalid JSON: {exc}") from exc
    for key in ("n", "y", "stem_weights", "inputs"):
        if key not in doc:
            raise FileFormatError(f"{path}: missing field {key!r}")
    spec = StemBudSpec(
        int(doc["n"]),
        int(doc["y"]),
        tuple(float(v) for v in doc["stem_weights"]),
        float(doc.get("a_yn", 0.0)),
    )
    return spec, tuple(int(v) for v in doc["inputs"])


def write_stembud_spec_json(path, spec: StemBudSpec, inputs) -> None:
    doc = {
        "n": spec.n,
        "y": spec.y,
        "stem_weights": list(spec.chain_weights),
        "a_yn": spec.back_weight,
        "inputs": sorted(int(v) for v in inputs),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (frozenset, set)):
        return sorted(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=1)
        fh.write("\n")


def write_records_csv(path, header, rows) -> None:
    """CSV with exactly one header line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(list(row))
