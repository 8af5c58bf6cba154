"""Drive a free multi-particle run: evolve modes, record snapshots and the
per-step diagnostics."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .algebra import components
from .continuity import continuity_residual
from .propagation import CIRCULAR_POLARIZATION, GridSpec, SingleParticleMode, gaussian_mode
from .state import FactorizedWaveState, DensitySnapshot, assemble_density

__all__ = [
    "WaveRunConfig",
    "RunResult",
    "default_modes",
    "default_coefficients",
    "default_state",
    "mode_boundary_mass",
    "auto_coarsen",
    "simulate",
    "translate_state",
    "boosted_snapshots",
    "WRAP_THRESHOLD",
    "JOINT_CELL_TARGET",
]

WRAP_THRESHOLD = 1e-6
JOINT_CELL_TARGET = 2_000_000

_PHOTON_POLARIZATIONS = [
    CIRCULAR_POLARIZATION,
    np.array([0, 0, 0, 1, -1j, 0]) / np.sqrt(2),
    np.array([0, 0, 1, 0, 0, 0]),
    np.array([0, 0, 0, 0, 0, 1]),
    np.array([1, -1j, 0, 0, 0, 0]) / np.sqrt(2),
    np.array([0, 0, 0, 1, 1j, 0]) / np.sqrt(2),
]


@dataclass
class WaveRunConfig:
    species: str = "photon"
    N: int = 2
    M: int = 16
    L: float = 16.0
    dt: float = 0.025
    steps: int = 40
    width: float = 0.85
    mass: float = 1.0
    c: float = 1.0
    coarsen: int | None = None
    record_every: int = 1

    def __post_init__(self):
        components(self.species)
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.dt > 0 or self.steps < 1 or self.record_every < 1:
            raise ValueError("dt, steps and record_every must be positive")
        if self.width * 8 > self.L:
            raise ValueError(f"box length {self.L} is under 8 packet widths ({self.width})")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.M, self.L)

    def to_dict(self) -> dict:
        return asdict(self)


def default_modes(species: str, grid: GridSpec, count: int, width: float) -> list[SingleParticleMode]:
    """Gaussian packets at the origin with distinct polarizations or spinors."""
    if species == "photon":
        spinors = _PHOTON_POLARIZATIONS
    else:
        spinors = list(np.eye(4, dtype=complex))
    if count > len(spinors):
        raise ValueError(f"at most {len(spinors)} default {species} modes")
    return [gaussian_mode(species, grid, s, width=width) for s in spinors[:count]]


def default_coefficients(species: str, N: int) -> np.ndarray:
    """Equal-weight symmetrisation (photons) or antisymmetrisation (fermions)
    of the product of the first ``N`` modes."""
    C = np.zeros((N,) * N, dtype=complex)
    for perm in itertools.permutations(range(N)):
        sign = 1
        if species == "fermion":
            sign = round(np.linalg.det(np.eye(N)[list(perm)]))
        C[perm] = sign
    return C


def default_state(cfg: WaveRunConfig) -> FactorizedWaveState:
    modes = default_modes(cfg.species, cfg.grid, cfg.N, cfg.width)
    return FactorizedWaveState(cfg.species, modes, default_coefficients(cfg.species, cfg.N),
                               mass=cfg.mass, c=cfg.c)


def mode_boundary_mass(mode: SingleParticleMode, width: float) -> float:
    """Fraction of a mode's mass within ``width`` of any box face."""
    g = mode.grid
    ax = g.axis()
    near = (ax - ax[0] + g.h / 2 < width) | (ax[-1] + g.h / 2 - ax < width)
    dens = np.sum(np.abs(mode.field) ** 2, axis=0)
    inside = ~near[:, None, None] & ~near[None, :, None] & ~near[None, None, :]
    return float(dens[~inside].sum() / dens.sum())


def auto_coarsen(M: int, N: int, n: int = 3, target: int = JOINT_CELL_TARGET) -> int:
    c = 1
    while (M // c) ** (n * N) > target and M % (2 * c) == 0:
        c *= 2
    return c


def translate_state(state: FactorizedWaveState, shift) -> FactorizedWaveState:
    """Rigidly translate every mode by ``shift`` (spectral phase)."""
    g = state.grid
    k = g.wavenumbers()
    phase = np.exp(-1j * np.einsum("k...,k->...", k, np.asarray(shift, dtype=float)))
    modes = [m.replace(np.fft.ifftn(np.fft.fftn(m.field, axes=(1, 2, 3)) * phase, axes=(1, 2, 3)))
             for m in state.modes]
    return FactorizedWaveState(state.species, modes, state.coeffs, state.time,
                               mass=state.mass, c=state.c, normalize=False)


def boosted_snapshots(state: FactorizedWaveState, dt: float, steps: int, *,
                      factor: float = 2.0, direction=(1.0, 0.0, 0.0), start=None,
                      record_every: int = 1, coarsen: int = 1) -> list[DensitySnapshot]:
    """Snapshots of ``state`` dragged along ``direction`` at ``factor * c``.

    The density is frozen in shape and moved ``factor * c * dt`` per step,
    so for ``factor > 1`` the result is not a causal evolution.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    speed = factor * state.c
    if start is None:
        start = -0.5 * speed * dt * steps * d
    out = []
    for k in range(0, steps + 1, record_every):
        moved = translate_state(state, np.asarray(start) + speed * dt * k * d)
        moved.time = state.time + k * dt
        out.append(assemble_density(moved, coarsen, with_velocity=False))
    return out


@dataclass(eq=False)
class RunResult:
    config: WaveRunConfig
    snapshots: list[DensitySnapshot]
    series: list[dict]
    coarsen: int
    wrap_flagged: bool
    max_boundary_mass: float
    meta: dict = field(default_factory=dict)

    def max_speed(self) -> float:
        return max(r["max_speed"] for r in self.series)

    def max_norm_drift(self) -> float:
        return max(r["norm_drift"] for r in self.series)

    def max_residual(self) -> float:
        vals = [r["residual"] for r in self.series if r["residual"] is not None]
        return max(vals) if vals else 0.0


def simulate(cfg: WaveRunConfig, state: FactorizedWaveState | None = None, *,
             with_velocity: bool = True) -> RunResult:
    """Evolve ``state`` (default packets if omitted) and record snapshots.

    Each recorded step contributes one row to the time series: joint norm
    drift, maximal particle speed, continuity residual against the previous
    snapshot and the largest per-mode boundary mass.  A run whose boundary
    mass reaches ``WRAP_THRESHOLD`` within two cells of a face is flagged,
    since periodic images would then interfere with the dynamics.
    """
    state = default_state(cfg) if state is None else state
    coarsen = cfg.coarsen or auto_coarsen(cfg.M, state.N)
    band = 2 * cfg.grid.h
    norm0 = state.joint_norm()
    snaps, series = [], []
    worst_edge = 0.0
    for k in range(cfg.steps + 1):
        edge = max(mode_boundary_mass(m, band) for m in state.modes)
        worst_edge = max(worst_edge, edge)
        if k % cfg.record_every == 0 or k == cfg.steps:
            snap = assemble_density(state, coarsen, with_velocity=with_velocity)
            residual = (continuity_residual(snaps[-1], snap)
                        if with_velocity and snaps else None)
            series.append({
                "step": k,
                "time": state.time,
                "norm_drift": abs(state.joint_norm() - norm0),
                "max_speed": snap.max_speed() if with_velocity else float("nan"),
                "residual": residual,
                "boundary_mass": edge,
            })
            snaps.append(snap)
        if k < cfg.steps:
            state = state.evolve(cfg.dt)
    return RunResult(cfg, snaps, series, coarsen, worst_edge >= WRAP_THRESHOLD, worst_edge)
