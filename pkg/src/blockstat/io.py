"""File formats: single-column series CSV, process specs and reports as JSON."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BlockStatError
from .processes import ProcessSpec


class FormatError(BlockStatError, ValueError):
    pass


def format_series(x) -> str:
    """Header ``x`` then one value per line with 17 significant digits, which round-trips float64."""
    x = np.asarray(x, dtype=np.float64).ravel()
    return "x\n" + "".join(f"{v:.17g}\n" for v in x)


def write_series(path, x) -> None:
    Path(path).write_text(format_series(x))


def read_series(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    if lines[0].strip() != "x":
        raise FormatError(f"{path}: line 1: expected header 'x', got {lines[0]!r}")
    out = []
    for n, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s:
            continue
        if "," in s:
            raise FormatError(f"{path}: line {n}: expected a single column")
        try:
            out.append(float(s))
        except ValueError:
            raise FormatError(f"{path}: line {n}: cannot parse {s!r}") from None
    return np.array(out, dtype=np.float64)


def read_spec(path) -> ProcessSpec:
    try:
        return ProcessSpec.from_json(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    except TypeError as exc:
        raise FormatError(f"{path}: {exc}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not np.isfinite(o):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")
