"""JSON wire format for quadratic systems.

Complex scalars are two-element [re, im] arrays.  The quadratic term may
be given dense (flat row-major list of n*n^2 pairs) or as sparse
triplets [i, j, l, re, im] addressing entry (i, (j, l)); triplets are
densified on load.
"""

from __future__ import annotations

import json

import numpy as np

from .system import QuadraticSystem


def _pair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def system_to_dict(sys: QuadraticSystem) -> dict:
    return {
        "n": sys.n,
        "f0": [_pair(z) for z in sys.f0],
        "f1": [[_pair(z) for z in row] for row in sys.f1],
        "f2": [_pair(z) for z in sys.f2.reshape(-1)],
    }


def system_to_json(sys: QuadraticSystem) -> str:
    return json.dumps(system_to_dict(sys), sort_keys=True, separators=(",", ":"))


def _from_pair(p) -> complex:
    return complex(float(p[0]), float(p[1]))


def system_from_dict(data: dict) -> QuadraticSystem:
    n = int(data["n"])
    f0 = np.array([_from_pair(p) for p in data["f0"]], dtype=complex)
    f1 = np.array(
        [[_from_pair(p) for p in row] for row in data["f1"]], dtype=complex
    )
    raw_f2 = data["f2"]
    if isinstance(raw_f2, dict):
        f2 = np.zeros((n, n * n), dtype=complex)
        for i, j, l, re, im in raw_f2["triplets"]:
            f2[int(i), int(j) * n + int(l)] = complex(float(re), float(im))
    else:
        flat = np.array([_from_pair(p) for p in raw_f2], dtype=complex)
        f2 = flat.reshape(n, n * n)
    return QuadraticSystem(f0=f0, f1=f1, f2=f2)


def system_from_json(text: str) -> QuadraticSystem:
    return system_from_dict(json.loads(text))
