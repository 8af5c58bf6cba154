"""Measures on N-particle causal trajectories over a finite time grid.

A trajectory is parametrised by coordinate time and is piecewise linear
between grid times.  A causal evolution of slice measures is turned into a
trajectory measure by coupling consecutive slices causally, replacing every
coupled pair of atoms by the straight segment joining them, and gluing the
segment measures at the interior slices.  Gluing splits the mass arriving at
an atom and the mass leaving it independently and proportionally, so the
result reproduces every slice exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import MeasureError, NonCausalEvolutionError
from .measures import Evolution, SliceMeasure, canonical_round
from .order import FLOAT_TOL, Coupling, PrecedenceCertificate, precedes_measures
from .spacetime import ModelParams, causal_mask

__all__ = [
    "PRUNE_THRESHOLD",
    "Trajectory",
    "TrajectoryMeasure",
    "EvolutionReport",
    "segment_measure",
    "concatenate",
    "build_trajectory_measure",
    "evaluate_pushforward",
    "verify_causal_evolution",
]

PRUNE_THRESHOLD = 1e-12


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Positions ``(m + 1, N, n)`` at the grid times, linear in between."""

    grid: np.ndarray
    positions: np.ndarray

    def at(self, t: float) -> np.ndarray:
        return _interpolate(self.grid, self.positions[None], t)[0]

    def is_causal(self, params: ModelParams, slack: float = 0.0) -> bool:
        return bool(np.all(_segment_mask(self.grid, self.positions[None], params, slack)))


def _segment_mask(grid, positions, params, slack=0.0):
    """(K, m) mask: is segment k of each trajectory causal?"""
    if len(grid) < 2:
        return np.ones((len(positions), 0), dtype=bool)
    t0 = np.broadcast_to(grid[:-1], positions.shape[:1] + (len(grid) - 1,))
    t1 = np.broadcast_to(grid[1:], t0.shape)
    return causal_mask(t0, positions[:, :-1], t1, positions[:, 1:], params, slack=slack)


def _interpolate(grid, positions, t):
    if not grid[0] <= t <= grid[-1]:
        raise ValueError(f"t={t} lies outside the grid span [{grid[0]}, {grid[-1]}]")
    k = int(np.searchsorted(grid, t, side="right")) - 1
    if k >= len(grid) - 1:
        return positions[:, -1]
    if t == grid[k]:
        return positions[:, k]
    s = (t - grid[k]) / (grid[k + 1] - grid[k])
    return (1.0 - s) * positions[:, k] + s * positions[:, k + 1]


class TrajectoryMeasure:
    """Weighted family of trajectories sharing one time grid.

    ``positions`` has shape ``(K, m + 1, N, n)``; weights are floats or, in
    exact mode, Fractions summing to one.
    """

    def __init__(self, grid, positions, weights, params: ModelParams, *,
                 exact: bool = False, tol: float = 1e-12):
        grid = np.asarray(grid, dtype=float)
        positions = np.asarray(positions, dtype=float)
        if grid.ndim != 1 or len(grid) < 1 or np.any(np.diff(grid) <= 0):
            raise MeasureError("grid must be strictly increasing")
        if positions.ndim != 4 or positions.shape[1:] != (len(grid), params.N, params.n):
            raise MeasureError(
                f"positions must have shape (K, {len(grid)}, {params.N}, {params.n}); "
                f"got {positions.shape}"
            )
        if len(weights) != len(positions) or len(positions) == 0:
            raise MeasureError("need one positive weight per trajectory")
        if exact:
            w = np.empty(len(weights), dtype=object)
            w[:] = [x if isinstance(x, Fraction) else Fraction(x) for x in weights]
            if any(x <= 0 for x in w) or sum(w, Fraction(0)) != 1:
                raise MeasureError("exact trajectory weights must be positive and sum to 1")
        else:
            w = np.asarray(weights, dtype=float)
            if np.any(w <= 0) or abs(w.sum() - 1.0) > tol:
                raise MeasureError("trajectory weights must be positive and sum to 1")
        self.grid = grid
        self.positions = positions
        self.weights = w
        self.params = params
        self.exact = exact

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return (f"TrajectoryMeasure(trajectories={len(self)}, grid=[{self.grid[0]}, "
                f"{self.grid[-1]}] ({len(self.grid)} points))")

    def trajectories(self):
        for p, w in zip(self.positions, self.weights):
            yield Trajectory(self.grid, p), w

    def segments_causal(self, slack: float = 0.0) -> bool:
        return bool(np.all(_segment_mask(self.grid, self.positions, self.params, slack)))

    def to_dict(self) -> dict:
        fmt = str if self.exact else float
        return {
            "params": self.params.to_dict(),
            "grid": self.grid.tolist(),
            "trajectories": [{"w": fmt(w), "xs": p.tolist()}
                             for p, w in zip(self.positions, self.weights)],
        }

    @classmethod
    def from_dict(cls, d: dict, *, exact: bool = False) -> "TrajectoryMeasure":
        params = ModelParams.from_dict(d["params"])
        trajs = d["trajectories"]
        pos = np.array([t["xs"] for t in trajs], dtype=float).reshape(
            len(trajs), len(d["grid"]), params.N, params.n)
        if exact:
            w = [Fraction(t["w"]) if isinstance(t["w"], str) else Fraction(float(t["w"]))
                 for t in trajs]
            total = sum(w, Fraction(0))
            w = [x / total for x in w]
        else:
            w = np.array([float(Fraction(t["w"])) if isinstance(t["w"], str) else float(t["w"])
                          for t in trajs])
            if abs(w.sum() - 1.0) > 1e-9:
                raise MeasureError("trajectory weights do not sum to 1")
            w = w / w.sum()
        return cls(d["grid"], pos, w, params, exact=exact)


def evaluate_pushforward(sigma: TrajectoryMeasure, t: float) -> SliceMeasure:
    """The slice measure ``(ev_t)_# σ``; coinciding positions merge."""
    pos = _interpolate(sigma.grid, sigma.positions, float(t))
    return SliceMeasure(t, pos, list(sigma.weights), sigma.params, exact=sigma.exact,
                        normalize=not sigma.exact)


def segment_measure(coupling: Coupling) -> TrajectoryMeasure:
    """Replace every coupled pair by the straight segment between the atoms."""
    mu, nu = coupling.mu, coupling.nu
    grid = [mu.t, nu.t]
    pos = np.stack([mu.positions[coupling.rows], nu.positions[coupling.cols]], axis=1)
    w = list(coupling.weights)
    if not coupling.exact:
        w = np.asarray(w, dtype=float)
        w = w / w.sum()
    return TrajectoryMeasure(grid, pos, w, mu.params, exact=coupling.exact)


def _key(x: np.ndarray) -> bytes:
    return canonical_round(x).tobytes()


def concatenate(first: TrajectoryMeasure, second: TrajectoryMeasure, *,
                prune: float = PRUNE_THRESHOLD, tol: float = FLOAT_TOL) -> TrajectoryMeasure:
    """Glue two trajectory measures at the shared grid time.

    Both must push forward to the same measure at the junction.  Each
    trajectory of ``first`` ending at ``p`` is paired with each trajectory of
    ``second`` starting at ``p``, with weight ``w1 * w2 / mass(p)``, the
    product of the two conditional measures at ``p``.  In float mode,
    trajectories lighter than ``prune`` are dropped and the rest renormalised.
    """
    if first.grid[-1] != second.grid[0]:
        raise MeasureError("grids do not meet at a common time")
    exact = first.exact and second.exact
    b = float(first.grid[-1])
    left, right = evaluate_pushforward(first, b), evaluate_pushforward(second, b)
    if not left.same_as(right, tol=tol):
        raise MeasureError("measures are not concatenable: junction marginals differ")

    ends = {}
    for k, p in enumerate(first.positions[:, -1]):
        ends.setdefault(_key(p), []).append(k)
    starts = {}
    for k, p in enumerate(second.positions[:, 0]):
        starts.setdefault(_key(p), []).append(k)

    grid = np.concatenate([first.grid, second.grid[1:]])
    paths, weights = [], []
    for key, ks in ends.items():
        ls = starts.get(key)
        if not ls:
            raise MeasureError("a junction atom has no continuation")
        w1 = [first.weights[k] for k in ks]
        w2 = [second.weights[k] for k in ls]
        mass = sum(w1, Fraction(0)) if exact else float(np.sum(w1))
        for k, a in zip(ks, w1):
            for l, c in zip(ls, w2):
                w = a * c / mass
                if not exact and w < prune:
                    continue
                paths.append((k, l))
                weights.append(w)
    pos = np.array([np.concatenate([first.positions[k], second.positions[l][1:]])
                    for k, l in paths])
    if exact:
        total = sum(weights, Fraction(0))
        weights = [w / total for w in weights] if total != 1 else weights
    else:
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
    return TrajectoryMeasure(grid, pos, weights, first.params, exact=exact)


def build_trajectory_measure(evo: Evolution, *, prune: float = PRUNE_THRESHOLD,
                             slack: float = 0.0) -> TrajectoryMeasure:
    """Construct a trajectory measure whose grid-time pushforwards are the
    slices of ``evo``.

    Raises :class:`NonCausalEvolutionError` carrying the certificate of the
    first consecutive pair that admits no causal coupling.
    """
    if len(evo) < 2:
        raise MeasureError("need at least two slices")
    sigma = None
    for k in range(len(evo) - 1):
        cert = precedes_measures(evo[k], evo[k + 1], slack=slack)
        if not cert.verdict:
            raise NonCausalEvolutionError((k, k + 1), cert)
        piece = segment_measure(cert.witness)
        sigma = piece if sigma is None else concatenate(sigma, piece, prune=prune)
    return sigma


@dataclass
class EvolutionReport:
    """Pairwise precedence verdicts over the grid; ``matrix[s, t]`` is only
    meaningful for ``s < t``."""

    times: np.ndarray
    matrix: np.ndarray
    certificates: dict = field(default_factory=dict)

    @property
    def causal(self) -> bool:
        m = len(self.times)
        return all(self.matrix[s, t] for s in range(m) for t in range(s + 1, m))

    @property
    def consecutive_causal(self) -> bool:
        return all(self.matrix[k, k + 1] for k in range(len(self.times) - 1))

    def failing_pairs(self) -> list[tuple[int, int]]:
        m = len(self.times)
        return [(s, t) for s in range(m) for t in range(s + 1, m) if not self.matrix[s, t]]

    def __bool__(self):
        return self.causal


def verify_causal_evolution(evo: Evolution, *, slack: float = 0.0) -> EvolutionReport:
    """Check ``μ_s ⪯ μ_t`` for every ordered pair of grid times."""
    m = len(evo)
    matrix = np.ones((m, m), dtype=bool)
    certs: dict[tuple[int, int], PrecedenceCertificate] = {}
    for s in range(m):
        for t in range(s + 1, m):
            cert = precedes_measures(evo[s], evo[t], slack=slack)
            certs[(s, t)] = cert
            matrix[s, t] = cert.verdict
    return EvolutionReport(evo.times, matrix, certs)
