"""Scheme description files.

A scheme file is JSON with dims, the two amplitude vectors as
[real, imag] pairs, and a list of Kraus matrices; see
schemas/qbc_scheme.schema.json for the exact shape.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from ..errors import DimensionMismatchError, EncodingError, StateValidationError
from .states import HilbertDims, OpenOperation, PureState, QbcScheme


def _complex_vector(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def _pairs(vector: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in vector]


def scheme_to_dict(scheme: QbcScheme) -> dict[str, Any]:
    return {
        "dim_a": scheme.dims.dim_a,
        "dim_b": scheme.dims.dim_b,
        "c0": _pairs(scheme.c0.amplitudes),
        "c1": _pairs(scheme.c1.amplitudes),
        "kraus": [
            [_pairs(row) for row in op]
            for op in scheme.open_op.kraus_operators
        ],
    }


def scheme_from_dict(data: dict[str, Any], dim_cap: int | None = None) -> QbcScheme:
    try:
        kwargs = {"cap": dim_cap} if dim_cap else {}
        dims = HilbertDims(int(data["dim_a"]), int(data["dim_b"]), **kwargs)
        c0 = PureState(dims, _complex_vector(data["c0"]))
        c1 = PureState(dims, _complex_vector(data["c1"]))
        kraus = [
            np.array([[complex(re, im) for re, im in row] for row in op], dtype=np.complex128)
            for op in data["kraus"]
        ]
        open_op = OpenOperation(kraus)
    except (KeyError, TypeError, ValueError,
            DimensionMismatchError, StateValidationError) as exc:
        # semantic validity (e.g. an opening that cannot distinguish the
        # commitments) still surfaces as SchemeValidationError below
        raise EncodingError(f"malformed scheme description: {exc}") from exc
    return QbcScheme(dims, c0, c1, open_op)


def load_scheme(path: str, dim_cap: int | None = None) -> QbcScheme:
    with open(path, "r", encoding="utf-8") as fp:
        data = json.load(fp)
    return scheme_from_dict(data, dim_cap=dim_cap)


def save_scheme(scheme: QbcScheme, path: str):
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(scheme_to_dict(scheme), fp, indent=2, sort_keys=True)
        fp.write("\n")
