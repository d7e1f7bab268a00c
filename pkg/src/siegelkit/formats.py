"""JSON literals for matrices, points and charts.

Matrix: ``{"g": 1, "entries": ["1", "1", "1", "2"]}`` (flat row-major integer
strings; nested rows are accepted too). Point: ``{"g": 1, "X": [["0.5"]],
"Y": [["2"]], "precision": 128}`` with decimal strings. Chart: ``{"g": 1,
"entries": [[[["0", "0"], ["1", "0"]]]], "domain": {"re": [-0.5, 0.5], "im":
[0.5, "inf"]}}`` where each entry lists ``[re, im]`` coefficients in ascending
degree.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import MalformedInputError
from .geometry import DEFAULT_PRECISION, SiegelPoint, make_point
from .symplectic import SymplecticMatrix
from .volume import ChartDomain, CurveChart


def load_literal(text_or_path) -> dict:
    """Parse a JSON literal, or read it from a file when given an existing path."""
    if isinstance(text_or_path, dict):
        return text_or_path
    s = str(text_or_path)
    p = Path(s)
    try:
        if not s.lstrip().startswith(("{", "[")) and p.exists():
            s = p.read_text()
        return json.loads(s)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInputError(f"cannot parse JSON input: {exc}") from exc


def _square_list(entries, n: int, name: str) -> list:
    arr = np.asarray(entries, dtype=object)
    if arr.ndim == 1 and arr.size == n * n:
        arr = arr.reshape(n, n)
    if arr.shape != (n, n):
        raise MalformedInputError(f"{name} must hold {n}x{n} entries, got shape {arr.shape}")
    return arr


def _parse_int(v) -> int:
    if isinstance(v, bool):
        raise MalformedInputError("booleans are not matrix entries")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v.strip())
        except ValueError:
            pass
    raise MalformedInputError(f"matrix entry {v!r} is not an integer")


def parse_matrix(obj) -> SymplecticMatrix:
    d = load_literal(obj)
    try:
        g = int(d["g"])
        entries = d["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError("matrix literal needs 'g' and 'entries'") from exc
    arr = _square_list(entries, 2 * g, "entries")
    ints = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        ints[idx] = _parse_int(v)
    return SymplecticMatrix(ints)


def matrix_to_dict(M: SymplecticMatrix) -> dict:
    return {"g": M.g, "entries": [str(v) for v in M.entries.flat]}


def parse_point(obj) -> SiegelPoint:
    d = load_literal(obj)
    try:
        g = int(d["g"])
        X, Y = d["X"], d["Y"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError("point literal needs 'g', 'X' and 'Y'") from exc
    prec = int(d.get("precision", DEFAULT_PRECISION))
    X = _square_list(X, g, "X")
    Y = _square_list(Y, g, "Y")
    for arr in (X, Y):
        for idx, v in np.ndenumerate(arr):
            if isinstance(v, bool) or not isinstance(v, (str, int, float)):
                raise MalformedInputError(f"point entry {v!r} must be a decimal string or number")
            arr[idx] = str(v)
    return make_point(X, Y, precision=prec)


def _digits(precision: int) -> int:
    return int(math.ceil(precision * math.log10(2))) + 2


def point_to_dict(Z: SiegelPoint) -> dict:
    n = _digits(Z.precision)

    def fmt(m):
        return [[format(v, f".{n}g") for v in row] for row in m]

    return {"g": Z.g, "X": fmt(Z.X), "Y": fmt(Z.Y), "precision": Z.precision}


def _parse_bound(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        return float(v)
    return float(v)


def parse_chart(obj) -> CurveChart:
    d = load_literal(obj)
    try:
        g = int(d["g"])
        entries = d["entries"]
        dom = d["domain"]
        domain = ChartDomain(tuple(_parse_bound(v) for v in dom["re"]),
                             tuple(_parse_bound(v) for v in dom["im"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"bad chart literal: {exc}") from exc
    if len(entries) != g or any(len(row) != g for row in entries):
        raise MalformedInputError(f"chart entries must be a {g}x{g} array of coefficient lists")
    n = max(len(p) for row in entries for p in row)
    coeffs = np.zeros((g, g, max(n, 1)), dtype=complex)
    for i in range(g):
        for j in range(g):
            for k, c in enumerate(entries[i][j]):
                try:
                    re, im = c
                    coeffs[i, j, k] = complex(float(re), float(im))
                except (TypeError, ValueError) as exc:
                    raise MalformedInputError(f"coefficient {c!r} is not a [re, im] pair") from exc
    return CurveChart(coeffs, domain)


def chart_to_dict(chart: CurveChart) -> dict:
    return chart.to_dict()


__all__ = [
    "load_literal", "parse_matrix", "matrix_to_dict", "parse_point", "point_to_dict",
    "parse_chart", "chart_to_dict",
]
