"""Readers for the CSV and JSON files the branchgrad CLI writes.

Parsing is strict on purpose: a figure silently drawn from a
misinterpreted column is worse than no figure, so every mismatch raises
``SchemaError`` naming the file and the column (or key) at fault.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

__all__ = [
    "SchemaError",
    "SCAN_LOSS",
    "SCAN_GRADS",
    "GRADSTATS",
    "OPT_TRACE",
    "read_table",
    "read_event",
]


class SchemaError(ValueError):
    """An input file is missing, malformed, or not the documented shape."""


SCAN_LOSS = {
    "theta": float,
    "loss_mean": float,
    "loss_median": float,
    "q25": float,
    "q75": float,
    "poly_fit_grad": float,
}

SCAN_GRADS = {
    "theta": float,
    "method": str,
    "grad_mean": float,
    "grad_std": float,
    "n": int,
}

GRADSTATS = {
    "mode": str,
    "method": str,
    "theta": float,
    "n": int,
    "mean": float,
    "std": float,
    "q25": float,
    "q50": float,
    "q75": float,
}

OPT_TRACE = {
    "replica": int,
    "step": int,
    "theta": float,
    "loss": float,
}


def read_table(path: Path | str, schema: dict[str, type]) -> list[dict]:
    """Parse a CSV file against ``schema`` (column name -> type).

    Returns one dict per row with typed values. Extra columns are ignored
    so schemas can grow; missing ones are an error.
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: file does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in schema if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing column(s) {', '.join(repr(c) for c in missing)} "
                f"(found: {', '.join(header) or 'nothing'})"
            )
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            row = {}
            for name, kind in schema.items():
                text = raw[name]
                try:
                    row[name] = kind(text)
                except (TypeError, ValueError):
                    raise SchemaError(
                        f"{path}, line {lineno}: column {name!r} value {text!r} "
                        f"is not {'an' if kind is int else 'a'} {kind.__name__}"
                    ) from None
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


_EVENT_KEYS = ("mode", "theta", "tangent", "primal", "alternative", "material")
_BRANCH_KEYS = ("tracks", "hits", "termination", "n_steps")
_MATERIAL_KEYS = ("nx", "ny", "extent", "values")


def _require_keys(doc: dict, keys, path: Path, where: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: {where} is not a JSON object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise SchemaError(
            f"{path}: {where} is missing key(s) {', '.join(repr(k) for k in missing)}"
        )


def read_event(path: Path | str) -> dict:
    """Parse and structurally validate an event.json document."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: file does not exist")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path}: not valid JSON ({err})") from None
    _require_keys(doc, _EVENT_KEYS, path, "event document")
    _require_keys(doc["primal"], _BRANCH_KEYS, path, "'primal'")
    if doc["alternative"] is not None:
        _require_keys(
            doc["alternative"],
            _BRANCH_KEYS + ("divergence_step", "flipped_to", "weight"),
            path,
            "'alternative'",
        )
    _require_keys(doc["material"], _MATERIAL_KEYS, path, "'material'")
    values = doc["material"]["values"]
    if len(values) != doc["material"]["ny"] or any(
        len(row) != doc["material"]["nx"] for row in values
    ):
        raise SchemaError(
            f"{path}: 'material.values' is not an ny x nx grid "
            f"(declared {doc['material']['ny']} x {doc['material']['nx']})"
        )
    return doc
