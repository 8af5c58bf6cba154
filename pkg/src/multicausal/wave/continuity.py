"""Discrete residual of the multi-particle continuity equation."""
from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from .state import DensitySnapshot

__all__ = ["continuity_residual", "residual_field", "translated_gaussian"]


def _divergence(flux: np.ndarray, spacing: float) -> np.ndarray:
    """Periodic centred divergence of ``flux`` with shape ``(N, n) + grid``."""
    N, n = flux.shape[:2]
    out = np.zeros(flux.shape[2:])
    for j in range(N):
        for k in range(n):
            axis = j * n + k
            f = flux[j, k]
            out += (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2 * spacing)
    return out


def residual_field(a: DensitySnapshot, b: DensitySnapshot) -> np.ndarray:
    """Pointwise ``(ρ_b - ρ_a)/Δt + ½ Σ_j ∇_j·(ρ_a v_a^j + ρ_b v_b^j)``.

    Both terms are centred at the midpoint time, so the scheme is second
    order in space and time.
    """
    if not a.same_grid(b):
        raise DimensionError("snapshots live on different grids")
    if a.velocity is None or b.velocity is None:
        raise ValueError("continuity residual needs velocities")
    dt = b.time - a.time
    if not dt > 0:
        raise ValueError("snapshots must be in increasing time order")
    flux = a.density * a.velocity + b.density * b.velocity
    return (b.density - a.density) / dt + 0.5 * _divergence(flux, a.spacing)


def continuity_residual(a: DensitySnapshot, b: DensitySnapshot) -> float:
    """L¹ norm of :func:`residual_field` over the joint grid."""
    return float(np.sum(np.abs(residual_field(a, b))) * a.cell_volume)


def translated_gaussian(t: float, m: int, L: float, velocity, *, width: float = 1.0,
                        N: int = 1, n: int = 3, center=None) -> DensitySnapshot:
    """Snapshot of a Gaussian density moving rigidly with constant ``velocity``.

    ``velocity`` has shape ``(N, n)``.  The exact solution of the continuity
    equation with that constant field, sampled on an ``m``-point periodic grid
    per axis over ``[-L/2, L/2)``.
    """
    v = np.asarray(velocity, dtype=float).reshape(N, n)
    c0 = np.zeros((N, n)) if center is None else np.asarray(center, float).reshape(N, n)
    h = L / m
    ax = -L / 2 + h * np.arange(m)
    shape = (m,) * (n * N)
    r2 = np.zeros(shape)
    for j in range(N):
        for k in range(n):
            axis = j * n + k
            s = [1] * (n * N)
            s[axis] = m
            r2 = r2 + ((ax - c0[j, k] - v[j, k] * t) ** 2).reshape(s)
    rho = np.exp(-r2 / (2 * width**2)) / (2 * np.pi * width**2) ** (n * N / 2)
    vel = np.broadcast_to(v.reshape(N, n, *([1] * (n * N))), (N, n) + shape).copy()
    return DensitySnapshot(t, rho, vel, h, -L / 2, n, N)
