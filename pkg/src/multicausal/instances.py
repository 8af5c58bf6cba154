"""Random measures, precedence instances and evolutions with known answers."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .measures import Evolution, SliceMeasure
from .spacetime import ModelParams

__all__ = [
    "random_weights",
    "random_measure",
    "cone_step",
    "feasible_successor",
    "random_instance",
    "random_causal_evolution",
    "inject_jump",
]


def random_weights(rng: np.random.Generator, k: int, exact: bool, denom: int = 24):
    """Positive weights summing to one; rationals with small denominators
    when ``exact``."""
    if exact:
        raw = rng.integers(1, denom, size=k)
        total = int(raw.sum())
        return [Fraction(int(r), total) for r in raw]
    w = rng.uniform(0.05, 1.0, size=k)
    return w / w.sum()


def random_measure(rng: np.random.Generator, params: ModelParams, k: int, *, t: float = 0.0,
                   exact: bool = False, spread: float = 2.0, lattice: float = 0.25) -> SliceMeasure:
    """``k`` distinct atoms on a coarse lattice (so ties and boundary cases occur)."""
    seen, pos = set(), []
    half = int(spread / lattice)
    while len(pos) < k:
        x = rng.integers(-half, half + 1, size=(params.N, params.n)) * lattice
        key = x.tobytes()
        if key not in seen:
            seen.add(key)
            pos.append(x)
    return SliceMeasure(t, np.array(pos, dtype=float), random_weights(rng, k, exact), params,
                        exact=exact)


def cone_step(rng: np.random.Generator, params: ModelParams, dt: float, size: int,
              lattice: float | None = None) -> np.ndarray:
    """Displacements with ``|Δx_j| <= c dt`` for every particle; boundary
    cases (lightlike steps) are drawn on purpose."""
    r = params.c * dt
    if lattice is not None:
        cand = np.arange(-np.floor(r / lattice), np.floor(r / lattice) + 1) * lattice
        out = np.empty((size, params.N, params.n))
        for s in range(size):
            for j in range(params.N):
                while True:
                    d = rng.choice(cand, size=params.n)
                    if np.sum(d**2) <= r * r:
                        break
                out[s, j] = d
        return out
    d = rng.standard_normal((size, params.N, params.n))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    rad = rng.uniform(0, 1, size=(size, params.N, 1)) ** (1 / params.n)
    rad[rng.uniform(size=(size, params.N, 1)) < 0.2] = 1.0
    return d * rad * r


def feasible_successor(rng: np.random.Generator, mu: SliceMeasure, dt: float, *,
                       max_atoms: int = 8, lattice: float | None = 0.25) -> SliceMeasure:
    """A measure ``ν`` at ``mu.t + dt`` with ``μ ⪯ ν`` by construction.

    Every atom of μ moves inside its cone and may split in two; the product
    of these moves is a causal coupling.
    """
    params = mu.params
    pos, w = [], []
    budget = max_atoms - len(mu)
    for x, m in zip(mu.positions, mu.weights):
        parts = 2 if budget > 0 and rng.uniform() < 0.5 else 1
        budget -= parts - 1
        steps = cone_step(rng, params, dt, parts, lattice)
        if parts == 1:
            shares = [m]
        elif mu.exact:
            a = Fraction(int(rng.integers(1, 4)), 4)
            shares = [m * a, m * (1 - a)]
        else:
            a = rng.uniform(0.2, 0.8)
            shares = [m * a, m * (1 - a)]
        for s, share in zip(steps, shares):
            pos.append(x + s)
            w.append(share)
    return SliceMeasure(mu.t + dt, np.array(pos), w, params, exact=mu.exact,
                        normalize=not mu.exact)


def random_instance(rng: np.random.Generator, params: ModelParams, kind: str, *,
                    exact: bool = False, min_atoms: int = 2, max_atoms: int = 8,
                    dt: float = 1.0) -> tuple[SliceMeasure, SliceMeasure]:
    """A pair ``(μ, ν)``.

    ``kind`` is ``"feasible"`` (causal coupling built in), ``"infeasible"``
    (one ν-atom lies outside the causal future of every μ-atom, so some mass
    cannot be reached), ``"perturbed"`` (a feasible ν with atoms nudged by
    one lattice step, often across a cone boundary) or ``"random"``
    (independent measures).  The last two have no verdict known in advance.
    """
    k = int(rng.integers(min_atoms, max_atoms + 1))
    mu = random_measure(rng, params, k, exact=exact)
    if kind == "random":
        m = int(rng.integers(min_atoms, max_atoms + 1))
        nu = random_measure(rng, params, m, t=dt, exact=exact)
        return mu, nu
    nu = feasible_successor(rng, mu, dt, max_atoms=max_atoms)
    if kind == "feasible":
        return mu, nu
    if kind == "perturbed":
        pos = nu.positions + rng.integers(-1, 2, size=nu.positions.shape) * 0.25
        w = random_weights(rng, len(nu), exact) if rng.uniform() < 0.5 else list(nu.weights)
        return mu, SliceMeasure(nu.t, pos, w, params, exact=exact, normalize=not exact)
    if kind != "infeasible":
        raise ValueError(f"unknown instance kind {kind!r}")
    # move one ν-atom out of reach of all of μ
    far = np.abs(mu.positions).max() + params.c * dt + 1.0 + rng.integers(0, 3)
    pos = nu.positions.copy()
    b = int(rng.integers(len(nu)))
    j = int(rng.integers(params.N))
    pos[b, j, 0] = far
    nu = SliceMeasure(nu.t, pos, list(nu.weights), params, exact=exact, normalize=not exact)
    return mu, nu


def random_causal_evolution(rng: np.random.Generator, params: ModelParams, *, slices: int = 5,
                            max_atoms: int = 16, exact: bool = False, dt: float = 0.5,
                            lattice: float | None = 0.25) -> Evolution:
    start = int(rng.integers(1, min(4, max_atoms) + 1))
    evo = [random_measure(rng, params, start, exact=exact)]
    for _ in range(slices - 1):
        evo.append(feasible_successor(rng, evo[-1], dt, max_atoms=max_atoms, lattice=lattice))
    return Evolution(evo)


def inject_jump(rng: np.random.Generator, evo: Evolution, k: int, *,
                lattice: float | None = 0.25) -> Evolution:
    """Replace slices ``k+1..`` so that only the step ``k -> k+1`` is superluminal.

    One atom of slice ``k+1`` is pushed beyond the reach of every atom of
    slice ``k``; later slices are regenerated causally from the modified one.
    """
    if not 0 <= k < len(evo) - 1:
        raise IndexError("jump index out of range")
    params = evo.params
    slices = list(evo.slices[: k + 1])
    nxt = evo[k + 1]
    dt = nxt.t - evo[k].t
    pos = nxt.positions.copy()
    b = int(rng.integers(len(nxt)))
    j = int(rng.integers(params.N))
    pos[b, j, 0] = np.abs(evo[k].positions).max() + params.c * dt + 1.0
    slices.append(SliceMeasure(nxt.t, pos, list(nxt.weights), params, exact=nxt.exact,
                               normalize=not nxt.exact))
    for s in evo.slices[k + 2 :]:
        prev = slices[-1]
        step = s.t - prev.t
        moved = feasible_successor(rng, prev, step, max_atoms=max(len(prev), 16), lattice=lattice)
        slices.append(moved)
    return Evolution(slices)
