"""Free single-particle propagation on a periodic grid.

Units: hbar = 1.  The photon symbol is ``c blockdiag(S·k, -S·k)`` and the
fermion symbol is ``c γ⁰γ·k + m c² γ⁰`` in the chiral basis.  Both
propagators are applied in closed form per wave vector, so a step is exact up
to FFT rounding and the grid's spectral truncation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..spacetime import ModelParams
from .algebra import DIRAC_ALPHA, GAMMA0, SPIN1, components

__all__ = [
    "GridSpec",
    "SingleParticleMode",
    "evolve_mode",
    "gaussian_mode",
    "plane_wave_mode",
    "CIRCULAR_POLARIZATION",
]

CIRCULAR_POLARIZATION = np.array([1, 1j, 0, 0, 0, 0], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class GridSpec:
    """Periodic cube ``[-L/2, L/2)^n`` sampled at ``M`` points per axis."""

    M: int
    L: float
    n: int = 3

    def __post_init__(self):
        if self.M < 4 or self.M & (self.M - 1):
            raise ValueError(f"M must be a power of two and at least 4, got {self.M}")
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got {self.L}")
        if self.n != 3:
            raise ValueError("wave grids are three-dimensional")

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.n

    def axis(self) -> np.ndarray:
        return -self.L / 2 + self.h * np.arange(self.M)

    def coordinates(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.axis()] * self.n), indexing="ij")

    def wavenumbers(self) -> np.ndarray:
        """Stacked wave vectors, shape ``(n, M, ..., M)``."""
        k = 2 * np.pi * np.fft.fftfreq(self.M, d=self.h)
        return np.array(np.meshgrid(*([k] * self.n), indexing="ij"))

    def to_dict(self) -> dict:
        return {"M": self.M, "L": self.L, "n": self.n}


@dataclass(eq=False)
class SingleParticleMode:
    """Spinor field of shape ``(components, M, M, M)``."""

    species: str
    grid: GridSpec
    field: np.ndarray
    norm0: float = field(init=False)

    def __post_init__(self):
        ncomp = components(self.species)
        f = np.asarray(self.field, dtype=complex)
        if f.shape != (ncomp,) + self.grid.shape:
            raise ValueError(f"{self.species} field must have shape {(ncomp,) + self.grid.shape}, "
                             f"got {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("mode contains non-finite values")
        self.field = f
        self.norm0 = self.norm()

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.field) ** 2) * self.grid.cell_volume))

    def inner(self, other: "SingleParticleMode") -> complex:
        return complex(np.vdot(self.field, other.field) * self.grid.cell_volume)

    def replace(self, field: np.ndarray) -> "SingleParticleMode":
        out = SingleParticleMode(self.species, self.grid, field)
        out.norm0 = self.norm0
        return out


@lru_cache(maxsize=16)
def _propagator(species: str, grid: GridSpec, dt: float, c: float, mass: float) -> np.ndarray:
    """Per-wave-vector unitary ``exp(-i H(k) dt)``, shape ``(d, d, M, M, M)``."""
    k = grid.wavenumbers()
    kk = np.sqrt(np.sum(k**2, axis=0))
    if species == "photon":
        khat = np.divide(k, kk, out=np.zeros_like(k), where=kk > 0)
        A = np.einsum("kab,k...->ab...", SPIN1, khat)
        A2 = np.einsum("ab...,bc...->ac...", A, A)
        theta = c * kk * dt
        eye = np.eye(3)[:, :, None, None, None]
        s, cm1 = np.sin(theta), np.cos(theta) - 1.0
        # S·k̂ has eigenvalues -1, 0, 1, so the exponential truncates at A²
        upper = eye - 1j * s * A + cm1 * A2
        lower = eye + 1j * s * A + cm1 * A2
        U = np.zeros((6, 6) + grid.shape, dtype=complex)
        U[:3, :3] = upper
        U[3:, 3:] = lower
        return U
    H = c * np.einsum("kab,k...->ab...", DIRAC_ALPHA, k) \
        + (mass * c**2) * GAMMA0[:, :, None, None, None]
    E = np.sqrt((c * kk) ** 2 + (mass * c**2) ** 2)
    # H² = E² I, so the exponential is a cosine and a sine term
    sinc = np.divide(np.sin(E * dt), E, out=np.full_like(E, dt), where=E > 0)
    eye = np.eye(4)[:, :, None, None, None]
    return np.cos(E * dt) * eye - 1j * sinc * H


def evolve_mode(mode: SingleParticleMode, dt: float, params: ModelParams | None = None, *,
                mass: float = 1.0, backward: bool = False) -> SingleParticleMode:
    """Advance ``mode`` by ``dt`` with the exact free propagator.

    With ``backward=True`` the adjoint propagator is applied, undoing a
    forward step of the same size.  ``mass`` only affects fermions.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not np.all(np.isfinite(mode.field)):
        raise ValueError("mode contains non-finite values")
    c = 1.0 if params is None else params.c
    U = _propagator(mode.species, mode.grid, float(dt), float(c), float(mass))
    spec = np.fft.fftn(mode.field, axes=(1, 2, 3))
    if backward:
        spec = np.einsum("ba...,b...->a...", U.conj(), spec)
    else:
        spec = np.einsum("ab...,b...->a...", U, spec)
    return mode.replace(np.fft.ifftn(spec, axes=(1, 2, 3)))


def gaussian_mode(species: str, grid: GridSpec, spinor, *, center=(0.0, 0.0, 0.0),
                  width: float = 0.75, k0=(0.0, 0.0, 0.0)) -> SingleParticleMode:
    """Unit-norm Gaussian packet ``spinor · exp(-|x - x0|²/(4 w²) + i k0·x)``."""
    spinor = np.asarray(spinor, dtype=complex)
    if spinor.shape != (components(species),):
        raise ValueError(f"{species} spinor needs {components(species)} components")
    xs = grid.coordinates()
    r2 = sum((x - x0) ** 2 for x, x0 in zip(xs, center))
    phase = sum(k * x for k, x in zip(k0, xs))
    env = np.exp(-r2 / (4 * width**2) + 1j * phase)
    f = spinor[:, None, None, None] * env[None]
    f /= np.sqrt(np.sum(np.abs(f) ** 2) * grid.cell_volume)
    return SingleParticleMode(species, grid, f)


def plane_wave_mode(species: str, grid: GridSpec, spinor, k_index=(0, 0, 1)) -> SingleParticleMode:
    """Unit-norm plane wave with wave vector ``2π k_index / L``."""
    spinor = np.asarray(spinor, dtype=complex)
    xs = grid.coordinates()
    phase = sum(2 * np.pi * m / grid.L * x for m, x in zip(k_index, xs))
    f = spinor[:, None, None, None] * np.exp(1j * phase)[None]
    f /= np.sqrt(np.sum(np.abs(f) ** 2) * grid.cell_volume)
    return SingleParticleMode(species, grid, f)
