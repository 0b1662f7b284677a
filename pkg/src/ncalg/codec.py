"""
Free Gibbs Transport - Polynomial Codec

Canonical JSON form: words as integer arrays, exact coefficients as
decimal strings ("3/4"), floats as numbers, complex as {"re", "im"}.
"""

import json
from fractions import Fraction
from typing import Union

from core.errors import ArtifactError

from .poly import NCPoly, TensorPoly, TracePoly

Encodable = Union[NCPoly, TracePoly, TensorPoly]


def encode_coeff(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return float(value)


def decode_coeff(value):
    if isinstance(value, dict):
        return complex(float(value["re"]), float(value["im"]))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, int):
        return Fraction(value)
    return float(value)


def to_dict(P: Encodable) -> dict:
    """Canonical dict; terms are emitted in sorted order."""
    if isinstance(P, NCPoly):
        terms = [{"word": list(w), "coeff": encode_coeff(c)} for w, c in P.items()]
        return {"kind": "ncpoly", "n": P.n, "terms": terms}
    if isinstance(P, TracePoly):
        terms = [
            {"base": list(b), "traces": [list(t) for t in ts], "coeff": encode_coeff(c)}
            for (b, ts), c in P.items()
        ]
        return {"kind": "tracepoly", "n": P.n, "terms": terms}
    if isinstance(P, TensorPoly):
        terms = [
            {
                "legs": [list(w) for w in legs],
                "traces": [list(t) for t in ts],
                "coeff": encode_coeff(c),
            }
            for (legs, ts), c in P.items()
        ]
        return {"kind": "tensorpoly", "n": P.n, "legs": P.legs, "terms": terms}
    raise TypeError(f"cannot encode {type(P).__name__}")


def from_dict(data: dict) -> Encodable:
    try:
        kind = data["kind"]
        n = int(data["n"])
        if kind == "ncpoly":
            return NCPoly(
                {tuple(t["word"]): decode_coeff(t["coeff"]) for t in data["terms"]}, n
            )
        if kind == "tracepoly":
            terms = {}
            for t in data["terms"]:
                key = (tuple(t["base"]), tuple(tuple(w) for w in t.get("traces", [])))
                terms[key] = terms.get(key, 0) + decode_coeff(t["coeff"])
            return TracePoly(terms, n)
        if kind == "tensorpoly":
            legs = int(data["legs"])
            terms = {}
            for t in data["terms"]:
                key = (
                    tuple(tuple(w) for w in t["legs"]),
                    tuple(tuple(w) for w in t.get("traces", [])),
                )
                terms[key] = terms.get(key, 0) + decode_coeff(t["coeff"])
            return TensorPoly(terms, n, legs)
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactError(f"malformed polynomial document: {e}") from e
    raise ArtifactError(f"unknown polynomial kind {kind!r}")


def dumps(P: Encodable) -> str:
    return json.dumps(to_dict(P), sort_keys=True)


def loads(text: str) -> Encodable:
    return from_dict(json.loads(text))
