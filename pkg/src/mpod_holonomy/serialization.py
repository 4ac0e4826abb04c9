"""Shared JSON matrix format: {"rows": R, "cols": C, "data": [[re, im], ...]} row-major."""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import InvalidSpec


def matrix_to_dict(m: np.ndarray) -> dict:
    a = np.atleast_2d(np.asarray(m, dtype=complex))
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]),
            "data": [[float(z.real), float(z.imag)] for z in a.ravel()]}


def matrix_from_dict(d: dict) -> np.ndarray:
    try:
        rows, cols, data = int(d["rows"]), int(d["cols"]), d["data"]
    except (KeyError, TypeError, ValueError):
        raise InvalidSpec("matrix needs integer 'rows', 'cols' and a 'data' list") from None
    if len(data) != rows * cols:
        raise InvalidSpec(f"matrix data has {len(data)} entries, expected {rows * cols}")
    flat = np.array([complex(float(re), float(im)) for re, im in data], dtype=complex)
    return flat.reshape(rows, cols)


def _clean(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats, non-finite as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def holonomy_to_dict(result, compare: dict | None = None) -> dict:
    d = {"unitary": matrix_to_dict(result.unitary),
         "frame_start": matrix_to_dict(result.frame_start),
         "steps": result.steps,
         "error_estimate": result.error_estimate,
         "selector": {"order": result.selector.order, "photon_number": result.selector.photon_number},
         "start": [[z.real, z.imag] for z in result.start.couplings],
         "eigenphases": [float(p) for p in result.eigenphases()],
         "unitarity_defect": result.unitarity_defect()}
    if compare is not None:
        d["compare"] = compare
    return d
