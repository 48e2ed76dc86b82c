"""Persistence: gap-set files, JSON reports and CSV tables."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import ValidationError
from .sets import GapSet

SCHEMA_VERSION = 1


def _reject_constant(name):
    raise ValidationError(f"non-finite number {name} in file", field="gaps")


def save_set(S: GapSet, path) -> Path:
    """Write ``S`` as JSON; floats use shortest round-trip repr, so loading is bit-exact."""
    data = {"schema_version": SCHEMA_VERSION, **S.to_dict()}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        text = json.dumps(jsonable(data, strict=True), indent=2, allow_nan=False)
    except ValueError as err:
        raise ValidationError(f"cannot save set: {err}", field="gaps") from None
    path.write_text(text + "\n", encoding="utf-8")
    return path


def load_set(path) -> GapSet:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"no such gap-set file: {path}", field="path")
    try:
        data = json.loads(path.read_text(encoding="utf-8"), parse_constant=_reject_constant)
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: not valid JSON ({err})", field="path") from None
    found = data.get("schema_version")
    if found != SCHEMA_VERSION:
        raise ValidationError(
            f"{path}: schema_version mismatch, expected {SCHEMA_VERSION}, found {found!r}", field="schema_version"
        )
    for key in ("window", "gaps"):
        if key not in data:
            raise ValidationError(f"{path}: missing {key!r}", field=key)
    return GapSet.from_dict(data)


def jsonable(obj, strict=False):
    """Plain-Python copy of ``obj``; NaN/inf become ``None`` unless ``strict``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v, strict) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v, strict) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v, strict) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            if strict:
                raise ValidationError(f"non-finite value {v}", field="value")
            return None
        return v
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict(), strict)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False)


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n", encoding="utf-8")
    return path


def write_csv(path, header, rows) -> Path:
    """Header row, then ``repr``-exact floats; no locale formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if v is None:
        return ""
    return str(v)


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    canon = json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
