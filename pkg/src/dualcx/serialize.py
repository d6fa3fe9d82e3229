"""Construct files: exact round-trip serialization.

Coefficients are stored as shortest round-trip decimal strings (pairs of
real and imaginary parts), so reading a file back reproduces the floats
bit for bit and byte-identical files mean identical constructs.  The
derived data (implicit equations, flexes, the identification map) is not
stored; it is re-derived on load and re-validated by the construct
guards, which keeps files small and makes tampering loud.
"""

from __future__ import annotations

import json

from .cubics import Construct, CubicMap, NodalCubic, make_construct, nodal_cubic
from .errors import ValidationError
from .numerics import DEFAULT_TOL, Poly, Tolerances

SCHEMA_VERSION = 1


def _enc_complex(z: complex) -> list[str]:
    z = complex(z)
    return [repr(float(z.real)), repr(float(z.imag))]


def _dec_complex(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def _enc_poly(p: Poly) -> list[list[str]]:
    return [_enc_complex(c) for c in p.coef]


def _dec_poly(data) -> Poly:
    return Poly([_dec_complex(pair) for pair in data])


def _enc_cubic(c: NodalCubic) -> dict:
    return {
        "x": _enc_poly(c.gamma.x),
        "y": _enc_poly(c.gamma.y),
        "w": _enc_poly(c.gamma.w),
        "node": [_enc_complex(c.node[0]), _enc_complex(c.node[1])],
    }


def _dec_cubic(data, tol: Tolerances) -> NodalCubic:
    gamma = CubicMap(_dec_poly(data["x"]), _dec_poly(data["y"]), _dec_poly(data["w"]))
    node = (_dec_complex(data["node"][0]), _dec_complex(data["node"][1]))
    return nodal_cubic(gamma, node=node, tol=tol)


def construct_to_json(c: Construct) -> str:
    payload = {
        "kind": "construct",
        "schema": SCHEMA_VERSION,
        "P": _enc_cubic(c.p),
        "Q": _enc_cubic(c.q),
        "intersection_index": c.n_index,
        "b": _enc_complex(c.b_param),
        "seed": c.seed,
    }
    return json.dumps(payload, sort_keys=True, indent=1)


def construct_from_json(text: str, tol: Tolerances = DEFAULT_TOL) -> Construct:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from exc
    if data.get("kind") != "construct" or data.get("schema") != SCHEMA_VERSION:
        raise ValidationError("not a supported construct file")
    p = _dec_cubic(data["P"], tol)
    q = _dec_cubic(data["Q"], tol)
    return make_construct(
        p, q, int(data["intersection_index"]), _dec_complex(data["b"]), tol, seed=data.get("seed")
    )
