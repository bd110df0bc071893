"""Exact comparisons against ``log2 n`` for rational quantities."""

from __future__ import annotations

import math
from fractions import Fraction


def leq_log2(r, n: int) -> bool:
    """``r <= log2(n)`` decided exactly."""
    r = Fraction(r)
    if r <= 0:
        return True
    if n <= 1:
        return False
    approx = math.log2(n)
    if abs(float(r) - approx) > 1e-9 * max(1.0, approx):
        return float(r) < approx
    # 2^(p/q) <= n  <=>  2^p <= n^q
    return (1 << r.numerator) <= n ** r.denominator


def ceil_log2(n: int) -> int:
    return 0 if n <= 1 else (n - 1).bit_length()


def ceil_sqrt_log2(n: int) -> int:
    """Smallest ``k >= 0`` with ``k*k >= log2 n``, i.e. ``2^(k*k) >= n``."""
    k = 0
    while (1 << (k * k)) < n:
        k += 1
    return k
