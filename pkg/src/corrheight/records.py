"""Line-delimited JSON records.

Every record carries a schema tag, the command, an echo of its inputs, a
provenance flag and the result fields.  Real numbers leave the process as
``{"mid": m, "rad": r}`` objects; bare floats found in a payload are wrapped
with radius 0.  Keys are sorted so identical inputs give identical bytes.
"""

import json
import math
from fractions import Fraction

import flint

from .algebraic import INF, AlgebraicNumber, HeightEstimate

SCHEMA = "corrheight.record/1"


def real(x, rad=0.0):
    """``{"mid", "rad"}`` for a float, Fraction, arb or HeightEstimate."""
    if isinstance(x, HeightEstimate):
        return {"mid": _float(x.value), "rad": _float(x.radius)}
    if isinstance(x, flint.arb):
        return {"mid": _float(float(x.mid())), "rad": _float(math.nextafter(float(x.rad()), math.inf)
                                                          if x.rad() != 0 else 0.0)}
    return {"mid": _float(float(x)), "rad": _float(rad)}


def _float(v):
    # JSON has no infinities or NaN
    if math.isfinite(v):
        return v
    return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")


def point_text(p):
    if p is INF:
        return "inf"
    if isinstance(p, AlgebraicNumber):
        return p.render()
    if isinstance(p, Fraction):
        return str(p)
    return str(p)


def normalize(value):
    """Wrap bare floats, stringify Fractions and points, recurse into containers."""
    if isinstance(value, dict):
        if set(value) == {"mid", "rad"}:
            return {"mid": _float(float(value["mid"])) if not isinstance(value["mid"], str)
                    else value["mid"],
                    "rad": _float(float(value["rad"])) if not isinstance(value["rad"], str)
                    else value["rad"]}
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return real(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (HeightEstimate, flint.arb)):
        return real(value)
    if value is INF or isinstance(value, AlgebraicNumber):
        return point_text(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def normalize_inputs(inputs):
    # inputs are echoed as given, so floats keep their text form
    return {str(k): (repr(v) if isinstance(v, float) else normalize(v)) for k, v in inputs.items()}


def make_record(command, inputs, result, certified, status="ok"):
    return {
        "schema": SCHEMA,
        "command": command,
        "inputs": normalize_inputs(inputs),
        "certified": bool(certified),
        "provenance": "certified" if certified else "heuristic",
        "status": status,
        "result": normalize(result),
    }


def dumps(record):
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def loads(line):
    rec = json.loads(line)
    if rec.get("schema") != SCHEMA:
        raise ValueError(f"unknown record schema {rec.get('schema')!r}")
    return rec
