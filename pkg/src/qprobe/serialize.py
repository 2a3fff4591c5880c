"""JSON and CSV encodings.

Complex arrays are JSON nested lists whose leaves are ``[re, im]`` pairs,
row-major (a matrix is a list of rows). Plain real numbers are accepted as
leaves on input.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable

import numpy as np

from .dynamics import Segment
from .errors import ValidationError
from .probability import DensityOperator, OutcomeDistribution, validate_density


def complex_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    pairs = np.stack([a.real, a.imag], axis=-1)
    return pairs.tolist()


def complex_from_json(data, ndim: int) -> np.ndarray:
    """Decode a complex array of known rank; leaves sit at depth ``ndim``."""

    def leaf(x):
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            return complex(x)
        if (isinstance(x, list) and len(x) == 2
                and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x)):
            return complex(x[0], x[1])
        raise ValidationError(f"expected a number or [re, im] pair, got {x!r}")

    def walk(x, depth):
        if depth == 0:
            return leaf(x)
        if not isinstance(x, list) or not x:
            raise ValidationError(f"expected a non-empty JSON array, got {x!r}")
        return [walk(r, depth - 1) for r in x]

    try:
        out = np.array(walk(data, ndim), dtype=complex)
    except ValueError as exc:
        raise ValidationError(f"ragged complex array: {exc}") from None
    return out


def density_to_json(w: DensityOperator) -> dict:
    return {"type": "density_operator", "dim": w.dim, "matrix": complex_to_json(w.matrix)}


def density_from_json(data: dict) -> DensityOperator:
    if data.get("type") != "density_operator":
        raise ValidationError("not a density_operator document")
    m = complex_from_json(data["matrix"], 2)
    if m.shape != (data["dim"], data["dim"]):
        raise ValidationError("matrix shape disagrees with dim")
    return validate_density(m)


def distribution_to_json(d: OutcomeDistribution) -> dict:
    return {"labels": [str(x) for x in d.labels], "probabilities": d.probabilities.tolist()}


def distribution_from_json(data: dict) -> OutcomeDistribution:
    return OutcomeDistribution(tuple(data["labels"]), np.asarray(data["probabilities"], float))


def distribution_to_csv(d: OutcomeDistribution) -> str:
    return rows_to_csv(["label", "probability"], zip(map(str, d.labels), d.probabilities.tolist()))


def schedule_from_json(data) -> list[Segment]:
    """Piecewise-constant Hamiltonian schedule: ``[{"duration": t, "matrix": ...}, ...]``."""
    if not isinstance(data, list) or not data:
        raise ValidationError("schedule must be a non-empty list")
    segs = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or set(item) != {"duration", "matrix"}:
            raise ValidationError(f"schedule entry {i} must have exactly 'duration' and 'matrix'")
        segs.append(Segment(float(item["duration"]), complex_from_json(item["matrix"], 2)))
    return segs


def schedule_to_json(segments: Iterable[Segment]) -> list:
    return [{"duration": s.duration, "matrix": complex_to_json(s.hamiltonian)} for s in segments]


def fmt(x) -> str:
    """Shortest round-trip repr for floats, so CSV output is reproducible byte for byte."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def rows_to_csv(header: list[str], rows: Iterable, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def dumps(data) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
