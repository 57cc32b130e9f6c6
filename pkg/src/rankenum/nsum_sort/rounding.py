"""Rational-to-integer rounding and radix sorting of the resulting keys."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import _accel, kernels

LIMB = 32
_MASK = (1 << LIMB) - 1


def bit_budget(pairs: Sequence[tuple]) -> int:
    """Smallest ``b`` such that every numerator and denominator has at most ``b`` bits."""
    b = 1
    for p, q in pairs:
        b = max(b, abs(p).bit_length(), q.bit_length())
    return b


def _as_pairs(values) -> list:
    out = []
    for v in values:
        if isinstance(v, tuple):
            p, q = v
        else:
            f = Fraction(v)
            p, q = f.numerator, f.denominator
        if q <= 0:
            raise ValueError("denominators must be positive")
        out.append((int(p), int(q)))
    return out


def floor_keys(values, b: int | None = None) -> list:
    """``floor(p * 4**(b+1) / q)`` for every rational ``p/q``.

    Distinct rationals whose parts fit in ``b`` bits differ by at least
    ``4**-b``, so the scaled floors keep their strict order and map equal
    values (in any representation) to equal integers.
    """
    pairs = _as_pairs(values)
    if b is None:
        b = bit_budget(pairs)
    shift = 2 * b + 2
    return [(p << shift) // q for p, q in pairs]


def argsort_int_keys(keys: Sequence[int], *extra_major: np.ndarray) -> np.ndarray:
    """Stable argsort of Python integers of any size.

    ``extra_major`` columns (non-negative int64 arrays), if given, are more
    significant than the keys, in the order given.
    """
    n = len(keys)
    if n == 0:
        return np.zeros(0, np.int64)
    lo = min(keys)
    shifted = [k - lo for k in keys]
    width = max(shifted).bit_length()
    nlimbs = max(1, -(-width // LIMB))
    cols = [np.asarray(c, dtype=np.uint64) for c in extra_major]
    if nlimbs == 1:
        cols.append(np.fromiter(shifted, dtype=np.uint64, count=n))
    elif width <= 63:
        cols.append(np.fromiter(shifted, dtype=np.uint64, count=n))
    else:
        for j in range(nlimbs - 1, -1, -1):
            sh = LIMB * j
            cols.append(np.fromiter(((k >> sh) & _MASK for k in shifted), dtype=np.uint64, count=n))
    return radix_argsort_columns(np.vstack(cols))


def radix_argsort_columns(cols: np.ndarray) -> np.ndarray:
    """Stable argsort by rows of ``cols`` (shape (L, N), row 0 most significant)."""
    cols = np.ascontiguousarray(cols, dtype=np.uint64)
    if _accel.USE_NUMBA:
        return kernels.radix_argsort(cols)
    # numpy fallback: lexsort is stable and treats its last key as primary
    return np.lexsort(cols[::-1]).astype(np.int64)


def round_and_radix_sort(values, b: int | None = None) -> np.ndarray:
    """Stable permutation sorting rationals via :func:`floor_keys` and radix passes."""
    return argsort_int_keys(floor_keys(values, b))
