"""Small bundled inputs used by the selftest and the demos."""
from __future__ import annotations

from fractions import Fraction

from .measures import SliceMeasure, dirac
from .spacetime import ModelParams

__all__ = ["point_pair", "blocked_matching"]


def point_pair():
    """Two Dirac measures, the second inside the future cone of the first."""
    params = ModelParams(c=1.0, n=3, N=2)
    p = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
    q = [[0.6, 0.0, 0.0], [1.0, 0.8, 0.0]]
    return dirac(0.0, p, params), dirac(1.0, q, params)


def blocked_matching():
    """Every single atom of the first measure reaches some later atom, but the
    two leftmost atoms jointly carry 2/3 and reach only 1/3."""
    params = ModelParams(c=1.0, n=1, N=1)
    third = Fraction(1, 3)
    mu = SliceMeasure(0.0, [[[0.0]], [[0.2]], [[5.0]]], [third] * 3, params, exact=True)
    nu = SliceMeasure(1.0, [[[1.0]], [[4.5]], [[5.5]]], [third] * 3, params, exact=True)
    return mu, nu
