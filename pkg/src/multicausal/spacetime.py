"""Causal structure of the N-particle Minkowski configuration spacetime.

A configuration event is ``(t, x_1, ..., x_N)`` with every ``x_j`` in R^n.
An event ``p`` causally precedes ``q`` when ``q`` is not earlier than ``p``
and *every* particle's displacement fits in the light cone:

    ||q.x_j - p.x_j|| <= c (q.t - p.t)   for all j.

All predicates here are exact.  Comparisons are first made in floating point
and any pair lying within a thin band around the light-cone boundary is
re-decided in rational arithmetic (every float is a dyadic rational, so the
rational check is the true answer for the given inputs).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionError, MeasureError

__all__ = [
    "ModelParams",
    "ConfigEvent",
    "CompactRegion",
    "FutureSlice",
    "causal_mask",
    "causal_edges",
    "precedes_point",
    "precedes_point_tolerant",
    "chronologically_precedes_point",
    "future_contains",
    "future_mask",
    "slice_future_region",
]

# relative width of the band in which float decisions are re-checked exactly
_BAND = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Speed of light ``c``, spatial dimension ``n`` and particle count ``N``."""

    c: float = 1.0
    n: int = 3
    N: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"c must be positive and finite, got {self.c}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", int(self.N))

    def with_particles(self, N: int) -> "ModelParams":
        return ModelParams(c=self.c, n=self.n, N=N)

    def to_dict(self) -> dict:
        return {"c": self.c, "n": self.n, "N": self.N}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(c=float(d.get("c", 1.0)), n=int(d.get("n", 3)), N=int(d.get("N", 1)))


@dataclass(frozen=True, eq=False)
class ConfigEvent:
    """A point ``(t, x_1, ..., x_N)``; ``xs`` has shape ``(N, n)``."""

    t: float
    xs: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        if xs.ndim == 1:
            xs = xs[None, :]
        if xs.ndim != 2:
            raise DimensionError(f"xs must have shape (N, n), got {xs.shape}")
        if not (np.isfinite(self.t) and np.all(np.isfinite(xs))):
            raise ValueError("event coordinates must be finite")
        xs.setflags(write=False)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "xs", xs)

    @property
    def N(self) -> int:
        return self.xs.shape[0]

    @property
    def n(self) -> int:
        return self.xs.shape[1]

    def particle(self, j: int) -> "ConfigEvent":
        """The single-particle event ``(t, x_j)``."""
        return ConfigEvent(self.t, self.xs[j : j + 1])

    def __eq__(self, other):
        if not isinstance(other, ConfigEvent):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.xs, other.xs)

    def __hash__(self):
        return hash((self.t, self.xs.tobytes(), self.xs.shape))

    def __repr__(self):
        return f"ConfigEvent(t={self.t!r}, xs={self.xs.tolist()!r})"


def _check_event(p: ConfigEvent, params: ModelParams):
    if p.xs.shape != (params.N, params.n):
        raise DimensionError(
            f"event has shape {p.xs.shape}, params expect {(params.N, params.n)}"
        )


def _exact_within(dt, disp, c, slack, strict):
    """Rational decision for one pair: ``dt`` a Fraction, ``disp`` an (N, n)
    nested sequence of Fractions."""
    if dt < 0 or (strict and dt == 0):
        return False
    reach = Fraction(c) * dt + Fraction(slack)
    if reach < 0:
        return False
    r2 = reach * reach
    for row in disp:
        d2 = sum((x * x for x in row), Fraction(0))
        if (d2 >= r2) if strict else (d2 > r2):
            return False
    return True


def _decide(dt, d2, scale, c, slack, strict, exact_fn):
    """Vectorised decision with exact fallback.

    ``dt`` has shape S, ``d2`` shape S + (N,), ``scale`` shape S.  ``exact_fn``
    maps an index tuple into S to the exact boolean.
    """
    reach = c * dt + slack
    r2 = reach * reach
    band = _BAND * (1.0 + scale) ** 2
    gap = r2[..., None] - d2
    if strict:
        ok = np.all(gap > band[..., None], axis=-1) & (dt > 0)
        bad = np.any(gap < -band[..., None], axis=-1) | (dt <= 0)
    else:
        ok = np.all(gap > band[..., None], axis=-1) & (dt >= 0)
        bad = np.any(gap < -band[..., None], axis=-1) | (dt < 0)
    # a slightly negative reach squares to a positive r2
    bad |= reach < -band
    ok &= reach >= 0
    ambiguous = ~(ok | bad)
    result = np.array(ok, copy=True)
    if np.any(ambiguous):
        if result.ndim == 0:
            return np.array(exact_fn(()))
        for idx in zip(*np.nonzero(ambiguous)):
            result[idx] = exact_fn(idx)
    return result


def _frac_array(a):
    return [[Fraction(float(v)) for v in row] for row in a]


def causal_mask(t_p, xs_p, t_q, xs_q, params: ModelParams, slack: float = 0.0,
                strict: bool = False) -> np.ndarray:
    """Broadcasting predicate ``p ⪯ q`` (or ``p ≪ q`` when ``strict``).

    ``t_*`` broadcast against each other and ``xs_*`` carry two trailing
    axes ``(N, n)``.  ``slack`` adds to the light-cone radius of every
    particle (the tolerant predicate); it must be nonnegative.
    """
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    t_p = np.asarray(t_p, dtype=float)
    t_q = np.asarray(t_q, dtype=float)
    xs_p = np.asarray(xs_p, dtype=float)
    xs_q = np.asarray(xs_q, dtype=float)
    if xs_p.shape[-2:] != (params.N, params.n) or xs_q.shape[-2:] != (params.N, params.n):
        raise DimensionError(
            f"positions {xs_p.shape[-2:]} / {xs_q.shape[-2:]} do not match "
            f"(N, n) = {(params.N, params.n)}"
        )
    shape = np.broadcast_shapes(t_p.shape, t_q.shape, xs_p.shape[:-2], xs_q.shape[:-2])
    t_p, t_q = np.broadcast_to(t_p, shape), np.broadcast_to(t_q, shape)
    xs_p = np.broadcast_to(xs_p, shape + xs_p.shape[-2:])
    xs_q = np.broadcast_to(xs_q, shape + xs_q.shape[-2:])
    c = params.c
    dt = t_q - t_p
    # float subtraction can flip the sign of a tiny dt; comparisons cannot
    dt = np.where(t_q < t_p, np.minimum(dt, -np.finfo(float).tiny),
                  np.where(t_q > t_p, dt, 0.0))
    d2 = np.sum((xs_q - xs_p) ** 2, axis=-1)
    scale = np.maximum(np.abs(xs_p).max(axis=(-1, -2), initial=0.0),
                       np.abs(xs_q).max(axis=(-1, -2), initial=0.0))
    scale = np.maximum(scale, c * np.maximum(np.abs(t_p), np.abs(t_q)) + slack)

    def exact(idx):
        dte = Fraction(float(t_q[idx])) - Fraction(float(t_p[idx]))
        a, b = _frac_array(xs_p[idx]), _frac_array(xs_q[idx])
        disp = [[qb - pa for pa, qb in zip(ra, rb)] for ra, rb in zip(a, b)]
        return _exact_within(dte, disp, c, slack, strict)

    return _decide(dt, d2, scale, c, slack, strict, exact)


def precedes_point(p: ConfigEvent, q: ConfigEvent, params: ModelParams) -> bool:
    """``p ⪯ q``: every particle's displacement lies in the closed light cone."""
    _check_event(p, params)
    _check_event(q, params)
    return bool(causal_mask(p.t, p.xs, q.t, q.xs, params))


def precedes_point_tolerant(p: ConfigEvent, q: ConfigEvent, params: ModelParams,
                            slack: float) -> bool:
    """Like :func:`precedes_point` with the cone radius enlarged by ``slack``.

    Intended for discretised data where grid error belongs to the caller.
    """
    _check_event(p, params)
    _check_event(q, params)
    return bool(causal_mask(p.t, p.xs, q.t, q.xs, params, slack=slack))


def chronologically_precedes_point(p: ConfigEvent, q: ConfigEvent,
                                   params: ModelParams) -> bool:
    """``p ≪ q``: strictly later and strictly inside every particle's cone."""
    _check_event(p, params)
    _check_event(q, params)
    return bool(causal_mask(p.t, p.xs, q.t, q.xs, params, strict=True))


def causal_edges(t_p: float, P: np.ndarray, t_q: float, Q: np.ndarray,
                 params: ModelParams, slack: float = 0.0, chunk: int = 1 << 22):
    """All index pairs ``(i, j)`` with ``(t_p, P[i]) ⪯ (t_q, Q[j])``.

    ``P`` and ``Q`` have shapes ``(k, N, n)`` and ``(m, N, n)``.  Pairs are
    returned in row-major order.  Work is chunked over rows to bound memory.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    k, m = len(P), len(Q)
    if k == 0 or m == 0 or t_q < t_p:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    per_row = max(1, m * params.N * params.n)
    rows = max(1, chunk // per_row)
    ii, jj = [], []
    for start in range(0, k, rows):
        block = P[start : start + rows]
        mask = causal_mask(t_p, block[:, None], t_q, Q[None, :], params, slack=slack)
        bi, bj = np.nonzero(mask)
        ii.append(bi + start)
        jj.append(bj)
    return np.concatenate(ii).astype(np.int64), np.concatenate(jj).astype(np.int64)


@dataclass(frozen=True, eq=False)
class CompactRegion:
    """A finite union of closed boxes on the slice ``t``.

    Each box is a product of per-particle axis-aligned boxes, stored as
    ``lo``/``hi`` arrays of shape ``(k, N, n)``.  Atom sets are boxes with
    ``lo == hi``.
    """

    t: float
    lo: np.ndarray
    hi: np.ndarray
    kind: str = field(default="boxes")

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.ndim == 2:
            lo, hi = lo[None], hi[None]
        if lo.ndim != 3 or lo.shape != hi.shape:
            raise DimensionError(f"box bounds must have shape (k, N, n); got {lo.shape}, {hi.shape}")
        if len(lo) == 0:
            raise MeasureError("a compact region must be nonempty")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.isfinite(self.t)):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box lower bounds exceed upper bounds")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def box(cls, t, lo, hi) -> "CompactRegion":
        """One box; ``lo``/``hi`` have shape ``(N, n)``."""
        return cls(t, np.asarray(lo, float)[None], np.asarray(hi, float)[None])

    @classmethod
    def from_atoms(cls, t, positions) -> "CompactRegion":
        positions = np.asarray(positions, dtype=float)
        if positions.ndim == 2:
            positions = positions[None]
        return cls(t, positions, positions.copy(), kind="atoms")

    @classmethod
    def from_event(cls, p: ConfigEvent) -> "CompactRegion":
        return cls.from_atoms(p.t, p.xs[None])

    def union(self, other: "CompactRegion") -> "CompactRegion":
        if other.t != self.t:
            raise ValueError("can only unite regions on the same slice")
        kind = self.kind if self.kind == other.kind else "boxes"
        return CompactRegion(self.t, np.concatenate([self.lo, other.lo]),
                             np.concatenate([self.hi, other.hi]), kind=kind)

    @property
    def N(self) -> int:
        return self.lo.shape[1]

    @property
    def n(self) -> int:
        return self.lo.shape[2]

    def __len__(self):
        return len(self.lo)

    def contains(self, xs) -> bool:
        """Membership of a spatial configuration on the region's own slice."""
        xs = np.asarray(xs, dtype=float)
        return bool(np.any(np.all((self.lo <= xs) & (xs <= self.hi), axis=(-1, -2))))


def future_mask(K: CompactRegion, t_q: float, Q: np.ndarray, params: ModelParams,
                slack: float = 0.0) -> np.ndarray:
    """Boolean mask over configurations ``Q`` (shape ``(m, N, n)``) on slice
    ``t_q``: which of them lie in the causal future of ``K``."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 2:
        Q = Q[None]
    if K.lo.shape[1:] != (params.N, params.n) or Q.shape[1:] != (params.N, params.n):
        raise DimensionError("region / configuration shape does not match params")
    if t_q < K.t or len(Q) == 0:
        return np.zeros(len(Q), dtype=bool)
    c = params.c
    out = np.zeros(len(Q), dtype=bool)
    dt_f = t_q - K.t
    for b in range(len(K)):
        lo, hi = K.lo[b], K.hi[b]
        gap = np.maximum(np.maximum(lo - Q, 0.0), Q - hi)  # (m, N, n)
        d2 = np.sum(gap * gap, axis=-1)
        dt = np.full(len(Q), dt_f)
        scale = np.maximum(np.abs(Q).max(axis=(-1, -2)),
                           max(np.abs(lo).max(), np.abs(hi).max()))
        scale = np.maximum(scale, c * max(abs(K.t), abs(t_q)) + slack)

        def exact(idx, lo=lo, hi=hi):
            (i,) = idx
            dte = Fraction(float(t_q)) - Fraction(K.t)
            disp = []
            for lrow, hrow, qrow in zip(lo, hi, Q[i]):
                disp.append([max(Fraction(float(l)) - Fraction(float(x)), Fraction(0),
                                 Fraction(float(x)) - Fraction(float(h)))
                             for l, h, x in zip(lrow, hrow, qrow)])
            return _exact_within(dte, disp, c, slack, False)

        out |= _decide(dt, d2, scale, c, slack, False, exact)
    return out


def future_contains(K: CompactRegion, q: ConfigEvent, params: ModelParams,
                    slack: float = 0.0) -> bool:
    """Whether ``q`` lies in ``J⁺(K)``.

    Boxes are products, so the per-particle constraints decouple: ``q`` is in
    the future of a box iff each ``q.x_j`` is within ``c·Δt`` of the box's
    ``j``-th factor.  An earlier ``q`` is simply outside the future.
    """
    _check_event(q, params)
    return bool(future_mask(K, q.t, q.xs[None], params, slack=slack)[0])


@dataclass(frozen=True, eq=False)
class FutureSlice:
    """``J⁺(K) ∩ Σ_t``: each box of ``K`` thickened by a ball of radius
    ``radius`` per particle.

    ``exact`` is False when the thickened box is not itself a box (n > 1 and
    positive radius); then :meth:`outer_region` is only an outer
    approximation, while :meth:`contains` stays exact.
    """

    source: CompactRegion
    t: float
    radius: float
    params: ModelParams
    empty: bool = False

    @property
    def exact(self) -> bool:
        return self.empty or self.radius == 0 or self.params.n == 1

    def contains(self, xs) -> bool:
        if self.empty:
            return False
        return bool(future_mask(self.source, self.t, np.asarray(xs, float)[None], self.params)[0])

    def mask(self, Q) -> np.ndarray:
        if self.empty:
            return np.zeros(len(Q), dtype=bool)
        return future_mask(self.source, self.t, Q, self.params)

    def outer_region(self) -> CompactRegion | None:
        """Box cover ``[lo - r, hi + r]`` of every thickened box."""
        if self.empty:
            return None
        r = self.radius
        return CompactRegion(self.t, self.source.lo - r, self.source.hi + r)


def slice_future_region(K: CompactRegion, t: float, params: ModelParams) -> FutureSlice:
    """The causal future of ``K`` intersected with the slice at time ``t``."""
    if t < K.t:
        return FutureSlice(K, float(t), 0.0, params, empty=True)
    return FutureSlice(K, float(t), params.c * (t - K.t), params)
