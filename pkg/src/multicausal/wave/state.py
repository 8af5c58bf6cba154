"""Multi-particle states as coefficient tensors over single-particle modes,
and assembly of joint densities and per-particle velocity fields."""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, ResourceLimitError
from ..spacetime import ModelParams
from .algebra import velocity_operators
from .propagation import GridSpec, SingleParticleMode, evolve_mode

__all__ = [
    "FactorizedWaveState",
    "DensitySnapshot",
    "assemble_density",
    "memory_budget",
    "DENSITY_FLOOR",
    "DEFAULT_MEMORY_BUDGET",
]

DENSITY_FLOOR = 1e-14
DEFAULT_MEMORY_BUDGET = 1 << 30
BUDGET_ENV = "MULTICAUSAL_MEMORY_BUDGET"


def memory_budget() -> int:
    """Bytes available for one joint-grid assembly (env override allowed)."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_MEMORY_BUDGET
    try:
        value = int(float(raw))
    except ValueError as exc:
        raise ValueError(f"{BUDGET_ENV} must be a byte count, got {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"{BUDGET_ENV} must be positive")
    return value


def _perm_sign(perm) -> int:
    sign, seen = 1, list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def _symmetry_defect(C: np.ndarray, antisymmetric: bool) -> float:
    worst = 0.0
    for perm in itertools.permutations(range(C.ndim)):
        s = _perm_sign(perm) if antisymmetric else 1
        worst = max(worst, float(np.max(np.abs(np.transpose(C, perm) - s * C))))
    return worst


def _gram_fields(modes, ops=None, block: int = 1) -> np.ndarray:
    """``G[a, b, cell] = <ψ_a, O ψ_b>(cell)``, block-averaged over ``block³`` points."""
    F = np.stack([m.field for m in modes])
    OF = F if ops is None else np.einsum("ij,bj...->bi...", ops, F)
    G = np.einsum("ai...,bi...->ab...", F.conj(), OF)
    if block > 1:
        K, M = len(modes), F.shape[-1]
        m = M // block
        G = G.reshape(K, K, m, block, m, block, m, block).mean(axis=(3, 5, 7))
    return G.reshape(G.shape[0], G.shape[1], -1)


def _contract(D: np.ndarray, factors: list[np.ndarray]) -> np.ndarray:
    """``Σ_{αβ} D[α, β] Π_j F_j[α_j, β_j, x_j]`` on the product grid."""
    N = len(factors)
    letters = "abcdefghijklmnopqrstuvw"
    al, be, xs = letters[:N], letters[N : 2 * N], "ABCDEFGH"[:N]
    spec = al + be + "," + ",".join(f"{al[j]}{be[j]}{xs[j]}" for j in range(N)) + "->" + xs
    return np.einsum(spec, D, *factors, optimize="greedy")


@dataclass(eq=False)
class FactorizedWaveState:
    """``Ψ = Σ_α C_α ψ_{α_1} ⊗ ... ⊗ ψ_{α_N}`` with constant coefficients.

    Photon coefficients must be symmetric and fermion coefficients
    antisymmetric under index permutations.  On construction the tensor is
    rescaled so the joint norm is one.
    """

    species: str
    modes: list[SingleParticleMode]
    coeffs: np.ndarray
    time: float = 0.0
    mass: float = 1.0
    c: float = 1.0
    normalize: bool = True
    joint_norm0: float = field(init=False)

    def __post_init__(self):
        if not self.modes:
            raise ValueError("need at least one mode")
        grid = self.modes[0].grid
        for m in self.modes:
            if m.species != self.species or m.grid != grid:
                raise DimensionError("modes must share species and grid")
        C = np.asarray(self.coeffs, dtype=complex)
        K = len(self.modes)
        if C.ndim < 1 or any(s != K for s in C.shape):
            raise DimensionError(f"coefficients must have shape ({K},)*N, got {C.shape}")
        defect = _symmetry_defect(C, antisymmetric=self.species == "fermion")
        if defect > 1e-12 * max(1.0, float(np.max(np.abs(C)))):
            kind = "antisymmetric" if self.species == "fermion" else "symmetric"
            raise ValueError(f"{self.species} coefficients must be {kind} (defect {defect:.3g})")
        self.coeffs = C
        norm = self.joint_norm()
        if norm == 0:
            raise ValueError("state has zero norm")
        if self.normalize:
            self.coeffs = C / np.sqrt(norm)
        self.joint_norm0 = self.joint_norm()

    @property
    def N(self) -> int:
        return self.coeffs.ndim

    @property
    def grid(self) -> GridSpec:
        return self.modes[0].grid

    @property
    def params(self) -> ModelParams:
        return ModelParams(c=self.c, n=3, N=self.N)

    def gram_matrix(self) -> np.ndarray:
        K = len(self.modes)
        return np.array([[self.modes[a].inner(self.modes[b]) for b in range(K)]
                         for a in range(K)])

    def joint_norm(self) -> float:
        G = self.gram_matrix()[:, :, None]
        return float(_contract(_pair_tensor(self.coeffs), [G] * self.N).real.reshape(-1)[0])

    def evolve(self, dt: float, *, backward: bool = False) -> "FactorizedWaveState":
        modes = [evolve_mode(m, dt, self.params, mass=self.mass, backward=backward)
                 for m in self.modes]
        return FactorizedWaveState(self.species, modes, self.coeffs,
                                   self.time - dt if backward else self.time + dt,
                                   mass=self.mass, c=self.c, normalize=False)


def _pair_tensor(C: np.ndarray) -> np.ndarray:
    """``D[α, β] = conj(C_α) C_β`` laid out as ``(α_1..α_N, β_1..β_N)``."""
    return np.multiply.outer(C.conj(), C)


@dataclass(eq=False)
class DensitySnapshot:
    """Joint density on a product grid over ``R^{nN}``.

    ``density`` has shape ``(m,) * (n*N)`` with axis ``j*n + k`` holding
    coordinate ``k`` of particle ``j``.  ``velocity`` has shape
    ``(N, n) + density.shape`` or is ``None``.  Cell centres along every axis
    are ``origin + spacing * i``.
    """

    time: float
    density: np.ndarray
    velocity: np.ndarray | None
    spacing: float
    origin: float
    n: int
    N: int
    c: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        if d.ndim != self.n * self.N or len(set(d.shape)) > 1:
            raise DimensionError(f"density must be a cube of rank {self.n * self.N}")
        self.density = d
        if self.velocity is not None:
            v = np.asarray(self.velocity, dtype=float)
            if v.shape != (self.N, self.n) + d.shape:
                raise DimensionError("velocity shape does not match density")
            self.velocity = v

    @property
    def m(self) -> int:
        return self.density.shape[0]

    @property
    def cell_volume(self) -> float:
        return self.spacing ** (self.n * self.N)

    def axis(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.m)

    def total_mass(self) -> float:
        return float(self.density.sum() * self.cell_volume)

    def cell_masses(self) -> np.ndarray:
        return self.density * self.cell_volume

    def speeds(self) -> np.ndarray:
        """``|v^j|`` per particle, shape ``(N,) + density.shape``."""
        if self.velocity is None:
            raise ValueError("snapshot was assembled without velocities")
        return np.sqrt(np.sum(self.velocity**2, axis=1))

    def max_speed(self) -> float:
        return float(self.speeds().max())

    def same_grid(self, other: "DensitySnapshot") -> bool:
        return (self.density.shape == other.density.shape and self.n == other.n
                and self.N == other.N and np.isclose(self.spacing, other.spacing)
                and np.isclose(self.origin, other.origin))

    def swapped(self, i: int = 0, j: int = 1) -> np.ndarray:
        """Density with particles ``i`` and ``j`` exchanged."""
        order = list(range(self.N))
        order[i], order[j] = order[j], order[i]
        axes = [p * self.n + k for p in order for k in range(self.n)]
        return np.transpose(self.density, axes)

    def boundary_mass(self, width: float) -> float:
        """Mass in cells within ``width`` of the box edge along any axis."""
        ax = self.axis()
        lo = ax[0] - self.spacing / 2
        hi = ax[-1] + self.spacing / 2
        near = (ax - lo < width) | (hi - ax < width)
        inside = np.ones(self.density.shape, dtype=bool)
        for d in range(self.density.ndim):
            shape = [1] * self.density.ndim
            shape[d] = self.m
            inside &= ~near.reshape(shape)
        return float(self.density[~inside].sum() * self.cell_volume)


def assemble_density(state: FactorizedWaveState, coarsen: int = 1, *,
                     with_velocity: bool = True, floor: float = DENSITY_FLOOR,
                     budget: int | None = None) -> DensitySnapshot:
    """Evaluate ``Ψ†Ψ`` and the per-particle velocities on the joint grid.

    ``coarsen`` averages the density and the current over cubes of
    ``coarsen³`` points per particle; because the joint density is a sum of
    products of single-particle fields, this equals the exact cell average.
    Velocities are set to zero wherever the density is below ``floor`` times
    its maximum.
    """
    grid = state.grid
    if coarsen < 1 or grid.M % coarsen:
        raise ValueError(f"coarsen must divide M={grid.M}, got {coarsen}")
    m = grid.M // coarsen
    N, n = state.N, grid.n
    cells = m ** (n * N)
    nfields = 1 + (N * n if with_velocity else 0)
    need = cells * 8 * (nfields + 2)
    budget = memory_budget() if budget is None else budget
    if need > budget:
        raise ResourceLimitError(
            f"joint grid of {cells} cells needs about {need / 2**20:.0f} MiB, over the "
            f"budget of {budget / 2**20:.0f} MiB; use a larger coarsen factor "
            f"or raise {BUDGET_ENV}"
        )
    D = _pair_tensor(state.coeffs)
    G = _gram_fields(state.modes, block=coarsen)
    shape = (m,) * (n * N)
    rho = _contract(D, [G] * N).real
    rho = np.maximum(rho, 0.0).reshape(shape)
    vel = None
    if with_velocity:
        ops = velocity_operators(state.species)
        Hk = [_gram_fields(state.modes, ops[k], block=coarsen) for k in range(n)]
        vel = np.zeros((N, n) + shape)
        mask = rho >= floor * rho.max() if rho.max() > 0 else np.zeros(shape, bool)
        for j in range(N):
            for k in range(n):
                factors = [G] * N
                factors[j] = Hk[k]
                num = _contract(D, factors).real.reshape(shape)
                vel[j, k] = np.where(mask, state.c * num / np.where(mask, rho, 1.0), 0.0)
    h = grid.h * coarsen
    origin = -grid.L / 2 + (h - grid.h) / 2
    return DensitySnapshot(state.time, rho, vel, h, origin, n, N, state.c,
                           meta={"species": state.species, "coarsen": coarsen,
                                 "M": grid.M, "L": grid.L})
