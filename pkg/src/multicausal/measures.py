"""Finitely supported probability measures concentrated on one time slice."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionError, MeasureError, ResourceLimitError
from .spacetime import CompactRegion, FutureSlice, ModelParams

__all__ = [
    "MAX_ATOMS",
    "SliceMeasure",
    "Evolution",
    "canonical_round",
    "dirac",
    "product_measure",
    "symmetrize",
    "particle_marginal",
    "measure_of_region",
]

MAX_ATOMS = 100_000
WEIGHT_TOL = 1e-12
SIG_DIGITS = 12


def canonical_round(a: np.ndarray) -> np.ndarray:
    """Round every entry to 12 significant digits (idempotent, -0.0 -> 0.0)."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return a.copy()
    values, inverse = np.unique(a, return_inverse=True)
    rounded = np.array([float(f"{v:.{SIG_DIGITS}g}") for v in values]) + 0.0
    return rounded[inverse].reshape(a.shape)


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, str):
        return Fraction(w)
    if isinstance(w, (int, np.integer)):
        return Fraction(int(w))
    return Fraction(float(w))


class SliceMeasure:
    """Probability measure ``δ_t × Σ_i w_i δ_{x_i}`` on the slice at time ``t``.

    ``positions`` has shape ``(k, N, n)``.  On construction, coordinates are
    canonically rounded, coinciding atoms are merged and atoms are sorted
    lexicographically, so two measures describing the same distribution
    compare equal atom for atom.

    In exact mode the weights are :class:`fractions.Fraction` objects held in
    an object array and must sum to exactly one.
    """

    __slots__ = ("t", "positions", "weights", "params", "exact")

    def __init__(self, t, positions, weights, params: ModelParams, *,
                 exact: bool = False, normalize: bool = False,
                 tol: float = WEIGHT_TOL):
        positions = np.asarray(positions, dtype=float)
        if positions.ndim == 2 and params.N == 1:
            positions = positions[:, None, :]
        if positions.ndim != 3 or positions.shape[1:] != (params.N, params.n):
            raise DimensionError(
                f"positions must have shape (k, {params.N}, {params.n}); got {positions.shape}"
            )
        k = len(positions)
        if k == 0:
            raise MeasureError("a probability measure needs at least one atom")
        if k > MAX_ATOMS:
            raise ResourceLimitError(f"{k} atoms exceed the per-slice limit of {MAX_ATOMS}")
        if not (np.isfinite(t) and np.all(np.isfinite(positions))):
            raise MeasureError("atom coordinates must be finite")
        if len(weights) != k:
            raise MeasureError("one weight per atom is required")

        if exact:
            w = [_as_fraction(x) for x in weights]
            if any(x <= 0 for x in w):
                raise MeasureError("weights must be positive")
        else:
            w = np.asarray(weights, dtype=float)
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise MeasureError("weights must be positive and finite")

        positions = canonical_round(positions)
        flat = positions.reshape(k, -1)
        order = np.lexsort(flat.T[::-1]) if flat.shape[1] else np.arange(k)
        flat = flat[order]
        if exact:
            w = [w[i] for i in order]
        else:
            w = w[order]
        # merge duplicates (now adjacent)
        if k > 1:
            new = np.ones(k, dtype=bool)
            new[1:] = np.any(flat[1:] != flat[:-1], axis=1)
            if not np.all(new):
                group = np.cumsum(new) - 1
                if exact:
                    merged = [Fraction(0)] * int(group[-1] + 1)
                    for g, x in zip(group, w):
                        merged[g] += x
                    w = merged
                else:
                    w = np.bincount(group, weights=w)
                flat = flat[new]

        if exact:
            total = sum(w, Fraction(0))
            if normalize:
                w = [x / total for x in w]
            elif total != 1:
                raise MeasureError(f"exact weights sum to {total}, not 1")
            warr = np.empty(len(w), dtype=object)
            warr[:] = w
        else:
            total = float(np.sum(w))
            if normalize:
                w = w / total
            elif abs(total - 1.0) > tol:
                raise MeasureError(f"weights sum to {total!r}, not 1 (tolerance {tol})")
            warr = np.asarray(w, dtype=float)

        positions = flat.reshape(-1, params.N, params.n)
        positions.setflags(write=False)
        warr.setflags(write=False)
        self.t = float(t)
        self.positions = positions
        self.weights = warr
        self.params = params
        self.exact = bool(exact)

    # ------------------------------------------------------------------ basics
    @property
    def N(self) -> int:
        return self.params.N

    @property
    def n(self) -> int:
        return self.params.n

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"SliceMeasure(t={self.t}, atoms={len(self)}, N={self.N}, n={self.n}, {mode})"

    def atoms(self):
        """Iterate over ``(xs, weight)`` pairs."""
        return zip(self.positions, self.weights)

    def total(self):
        if self.exact:
            return sum(self.weights, Fraction(0))
        return float(np.sum(self.weights))

    def float_weights(self) -> np.ndarray:
        return np.asarray([float(x) for x in self.weights]) if self.exact else self.weights

    def as_float(self) -> "SliceMeasure":
        if not self.exact:
            return self
        return SliceMeasure(self.t, self.positions, self.float_weights(), self.params,
                            normalize=True)

    def as_exact(self, limit_denominator: int | None = None) -> "SliceMeasure":
        """Exact copy; float weights are taken at face value (or approximated
        with bounded denominators) and renormalised."""
        if self.exact:
            return self
        w = [Fraction(float(x)) for x in self.weights]
        if limit_denominator:
            w = [x.limit_denominator(limit_denominator) for x in w]
        return SliceMeasure(self.t, self.positions, w, self.params, exact=True, normalize=True)

    def common_denominator(self) -> tuple[list[int], int]:
        """Exact weights as integer numerators over one common denominator."""
        if not self.exact:
            raise MeasureError("common_denominator needs an exact-mode measure")
        den = 1
        for x in self.weights:
            den = den * x.denominator // math.gcd(den, x.denominator)
        return [int(x * den) for x in self.weights], den

    def mass(self, mask) -> float | Fraction:
        """Total weight of the atoms selected by a boolean mask."""
        mask = np.asarray(mask, dtype=bool)
        if self.exact:
            return sum((w for w, m in zip(self.weights, mask) if m), Fraction(0))
        return float(np.sum(self.weights[mask]))

    def same_as(self, other: "SliceMeasure", tol: float = 0.0) -> bool:
        """Identical slice time and atoms; weights equal within ``tol``."""
        if self.t != other.t or self.params != other.params or len(self) != len(other):
            return False
        if not np.array_equal(self.positions, other.positions):
            return False
        a = self.weights if self.exact and other.exact else self.float_weights()
        b = other.weights if self.exact and other.exact else other.float_weights()
        if self.exact and other.exact:
            return all(x == y for x, y in zip(a, b))
        return bool(np.max(np.abs(a - b)) <= tol)

    def with_time(self, t) -> "SliceMeasure":
        return SliceMeasure(t, self.positions, list(self.weights), self.params, exact=self.exact)

    # -------------------------------------------------------------- serialising
    def to_dict(self) -> dict:
        atoms = []
        for xs, w in self.atoms():
            atoms.append({"x": xs.tolist(), "w": (str(w) if self.exact else float(w))})
        return {"params": self.params.to_dict(), "t": self.t, "atoms": atoms}

    @classmethod
    def from_dict(cls, d: dict, *, exact: bool = False, tol: float = 1e-9) -> "SliceMeasure":
        params = ModelParams.from_dict(d["params"])
        return cls._from_atom_list(d["t"], d["atoms"], params, exact=exact, tol=tol)

    @classmethod
    def _from_atom_list(cls, t, atoms, params, *, exact=False, tol=1e-9):
        if not atoms:
            raise MeasureError("measure file has no atoms")
        xs = np.array([np.asarray(a["x"], dtype=float).reshape(params.N, params.n)
                       for a in atoms])
        if exact:
            w = [_as_fraction(a["w"]) for a in atoms]
            total = sum(w, Fraction(0))
            if abs(float(total) - 1.0) > tol:
                raise MeasureError(f"weights sum to {float(total)!r}, not 1 ± {tol}")
            return cls(t, xs, w, params, exact=True, normalize=True)
        w = np.array([float(_as_fraction(a["w"])) if isinstance(a["w"], str) else float(a["w"])
                      for a in atoms])
        total = float(np.sum(w))
        if abs(total - 1.0) > tol:
            raise MeasureError(f"weights sum to {total!r}, not 1 ± {tol}")
        return cls(t, xs, w, params, normalize=True)


def dirac(t, xs, params: ModelParams, exact: bool = False) -> SliceMeasure:
    """Unit point mass at the configuration ``xs`` (shape ``(N, n)``)."""
    return SliceMeasure(t, np.asarray(xs, float)[None], [1], params, exact=exact)


def product_measure(t, factors: Sequence[SliceMeasure]) -> SliceMeasure:
    """Distinguishable-particle product ``δ_t × μ_1 × ... × μ_N``."""
    if not factors:
        raise MeasureError("need at least one factor")
    n, c = factors[0].n, factors[0].params.c
    exact = all(f.exact for f in factors)
    for f in factors:
        if f.N != 1 or f.n != n or f.params.c != c:
            raise DimensionError("factors must be single-particle measures with equal n and c")
        if f.exact:
            if f.total() != 1:
                raise MeasureError("factor is not normalised")
        elif abs(f.total() - 1.0) > WEIGHT_TOL:
            raise MeasureError("factor is not normalised")
    params = ModelParams(c=c, n=n, N=len(factors))
    idx = list(itertools.product(*[range(len(f)) for f in factors]))
    pos = np.array([[f.positions[i][0] for f, i in zip(factors, combo)] for combo in idx])
    if exact:
        w = [math.prod((f.weights[i] for f, i in zip(factors, combo)), start=Fraction(1))
             for combo in idx]
    else:
        fw = [f.float_weights() for f in factors]
        w = [math.prod(f[i] for f, i in zip(fw, combo)) for combo in idx]
    return SliceMeasure(t, pos, w, params, exact=exact, normalize=not exact)


def symmetrize(mu: SliceMeasure) -> SliceMeasure:
    """Average of ``μ`` over all ``N!`` relabellings of the particles."""
    if mu.N < 2:
        raise DimensionError("symmetrisation needs N >= 2")
    perms = list(itertools.permutations(range(mu.N)))
    pos = np.concatenate([mu.positions[:, list(p), :] for p in perms])
    if mu.exact:
        share = Fraction(1, len(perms))
        w = [x * share for x in mu.weights] * len(perms)
    else:
        w = np.tile(mu.weights / len(perms), len(perms))
    return SliceMeasure(mu.t, pos, w, mu.params, exact=mu.exact, normalize=not mu.exact)


def particle_marginal(mu: SliceMeasure, j: int) -> SliceMeasure:
    """Pushforward of ``μ`` under ``(t, x_1, ..., x_N) ↦ (t, x_j)``.

    ``j`` is a zero-based particle index.
    """
    if not 0 <= j < mu.N:
        raise IndexError(f"particle index {j} out of range for N={mu.N}")
    params = mu.params.with_particles(1)
    return SliceMeasure(mu.t, mu.positions[:, j : j + 1, :], list(mu.weights), params,
                        exact=mu.exact, normalize=not mu.exact)


def measure_of_region(mu: SliceMeasure, region) -> float | Fraction:
    """Mass of the atoms lying in ``region``.

    ``region`` may be a :class:`CompactRegion` (membership on ``mu``'s
    slice), a :class:`FutureSlice`, any object with a vectorised
    ``mask(positions)`` method, or a plain predicate on an ``(N, n)`` array.
    """
    if isinstance(region, CompactRegion):
        if region.t != mu.t:
            mask = np.zeros(len(mu), dtype=bool)
        else:
            inside = (region.lo[None] <= mu.positions[:, None]) & (mu.positions[:, None] <= region.hi[None])
            mask = np.any(np.all(inside, axis=(-1, -2)), axis=1)
    elif isinstance(region, FutureSlice):
        mask = region.mask(mu.positions) if region.t == mu.t else np.zeros(len(mu), bool)
    elif hasattr(region, "mask"):
        mask = np.asarray(region.mask(mu.positions), dtype=bool)
    elif callable(region):
        mask = np.array([bool(region(xs)) for xs in mu.positions], dtype=bool)
    else:
        raise TypeError(f"unsupported region type {type(region).__name__}")
    return mu.mass(mask)


class Evolution:
    """Slice measures on a strictly increasing finite time grid."""

    __slots__ = ("slices",)

    def __init__(self, slices: Sequence[SliceMeasure]):
        slices = list(slices)
        if not slices:
            raise MeasureError("an evolution needs at least one slice")
        params = slices[0].params
        for a, b in zip(slices, slices[1:]):
            if not b.t > a.t:
                raise MeasureError("slice times must be strictly increasing")
        if any(s.params != params for s in slices):
            raise DimensionError("all slices must share the same parameters")
        self.slices = tuple(slices)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.slices])

    @property
    def params(self) -> ModelParams:
        return self.slices[0].params

    def __len__(self):
        return len(self.slices)

    def __getitem__(self, k) -> SliceMeasure:
        return self.slices[k]

    def __iter__(self):
        return iter(self.slices)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "slices": [{"t": s.t, "atoms": s.to_dict()["atoms"]} for s in self.slices],
        }

    @classmethod
    def from_dict(cls, d: dict, *, exact: bool = False) -> "Evolution":
        params = ModelParams.from_dict(d["params"])
        return cls([SliceMeasure._from_atom_list(s["t"], s["atoms"], params, exact=exact)
                    for s in d["slices"]])
