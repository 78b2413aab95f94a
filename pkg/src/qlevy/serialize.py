"""JSON helpers for complex-valued tensors.

Complex entries are stored as two-element [re, im] lists at the leaves, so
files stay language-neutral and diff-friendly.  Floats round-trip exactly
through json (repr is shortest round-trip in Python 3).
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError, ShapeError


def encode_complex(arr) -> list:
    """Nested lists with [re, im] leaves for a complex ndarray."""
    a = np.asarray(arr, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_complex(x) for x in a]


def decode_complex(data, shape: tuple[int, ...] | None = None) -> np.ndarray:
    """Inverse of encode_complex; optionally enforce a shape."""
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"complex tensor is not numeric: {exc}") from exc
    if a.ndim == 0 or a.shape[-1] != 2:
        raise ParseError("complex tensor leaves must be [re, im] pairs")
    out = a[..., 0] + 1j * a[..., 1]
    if shape is not None and out.shape != tuple(shape):
        raise ShapeError(f"expected shape {tuple(shape)}, got {out.shape}")
    return out
