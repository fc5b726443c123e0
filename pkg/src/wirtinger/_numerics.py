"""Small cancellation-free helpers for powers near 1."""

from __future__ import annotations

import numpy as np


def one_minus_pow(d, a):
    """Return ``1 - (1 - d)**a`` accurately for small ``d``.

    Works elementwise; ``d`` is the distance of the base from 1.  A zero
    base (``d = 1``) gives 1 for positive ``a``.
    """
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.expm1(a * np.log1p(-d))


def pow_ratio_gap(log_base, a):
    """Return ``1 - base**a`` given ``log(base)``; exact as base -> 1."""
    return -np.expm1(a * np.asarray(log_base, dtype=float))
