"""Exact rational vectors and discrete (sub)majorization.

Vectors are plain tuples of :class:`fractions.Fraction`. The relations follow
the usual convention: ``submajorizes(a, b)`` is ``b ≺ a`` (prefix sums of the
decreasing rearrangements), ``majorizes(a, b)`` additionally demands equal
totals.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import accumulate
from typing import Iterable, Tuple

from .errors import DimensionError

RVector = Tuple[Fraction, ...]


def vector(entries: Iterable) -> RVector:
    """Coerce ``entries`` to an exact rational vector (ints, strings "p/q", Fractions)."""
    out = tuple(Fraction(x) for x in entries)
    if not out:
        raise DimensionError("vectors must have length >= 1")
    return out


def rearrange_desc(a: Iterable) -> RVector:
    """Return ``a*``: the absolute values of ``a`` sorted nonincreasingly."""
    return tuple(sorted((abs(x) for x in vector(a)), reverse=True))


def is_nonincreasing(a: Iterable) -> bool:
    a = vector(a)
    return all(x >= y for x, y in zip(a, a[1:]))


def _check_lengths(a: RVector, b: RVector) -> None:
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")


def first_prefix_violation(a: Iterable, b: Iterable) -> int | None:
    """1-based index of the first k with sum(b*[:k]) > sum(a*[:k]), else None."""
    a, b = vector(a), vector(b)
    _check_lengths(a, b)
    pa = accumulate(rearrange_desc(a))
    pb = accumulate(rearrange_desc(b))
    for k, (x, y) in enumerate(zip(pa, pb), start=1):
        if y > x:
            return k
    return None


def submajorizes(a: Iterable, b: Iterable) -> bool:
    """True iff ``b ≺ a``."""
    return first_prefix_violation(a, b) is None


def majorizes(a: Iterable, b: Iterable) -> bool:
    """True iff ``b ⪯ a``: ``b ≺ a`` and the totals of ``a*`` and ``b*`` agree."""
    a, b = vector(a), vector(b)
    return submajorizes(a, b) and sum(map(abs, a)) == sum(map(abs, b))
