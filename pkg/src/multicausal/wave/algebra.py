"""Spin and Dirac matrices, and sampled checks of the pointwise speed bounds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SPIN1",
    "PAULI",
    "GAMMA0",
    "GAMMA",
    "DIRAC_ALPHA",
    "PHOTON_VELOCITY",
    "FERMION_VELOCITY",
    "components",
    "velocity_operators",
    "AlgebraCheck",
    "check_subluminality_algebra",
]

# generators of rotations, (S_k)_ab = -i eps_kab
SPIN1 = np.array([
    [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]],
    [[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]],
    [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]],
], dtype=complex)

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

# chiral basis
GAMMA0 = np.block([[_Z2, _I2], [_I2, _Z2]])
GAMMA = np.array([np.block([[_Z2, s], [-s, _Z2]]) for s in PAULI])
DIRAC_ALPHA = np.array([GAMMA0 @ g for g in GAMMA])

_Z3 = np.zeros((3, 3), dtype=complex)
PHOTON_VELOCITY = np.array([np.block([[s, _Z3], [_Z3, -s]]) for s in SPIN1])
FERMION_VELOCITY = DIRAC_ALPHA

SPECIES = ("photon", "fermion")


def components(species: str) -> int:
    if species == "photon":
        return 6
    if species == "fermion":
        return 4
    raise ValueError(f"unknown species {species!r}; expected one of {SPECIES}")


def velocity_operators(species: str) -> np.ndarray:
    """Hermitian matrices ``V_k`` with velocity ``c ψ†V_kψ / ψ†ψ``."""
    components(species)
    return PHOTON_VELOCITY if species == "photon" else FERMION_VELOCITY


def _complex_normal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _expect(ops, v):
    # real parts of v†O_k v for a batch of vectors v (s, d)
    return np.einsum("si,kij,sj->sk", v.conj(), ops, v).real


@dataclass(frozen=True)
class AlgebraCheck:
    species: str
    samples: int
    max_relative_excess: float
    identity_residual: float | None = None

    def passed(self, bound_tol: float = 1e-12, identity_tol: float = 1e-10) -> bool:
        ok = self.max_relative_excess <= bound_tol
        if self.identity_residual is not None:
            ok = ok and self.identity_residual <= identity_tol
        return ok

    def to_dict(self) -> dict:
        return {
            "species": self.species,
            "samples": self.samples,
            "max_relative_excess": self.max_relative_excess,
            "identity_residual": self.identity_residual,
        }


def check_subluminality_algebra(species: str, samples: int,
                                rng: np.random.Generator | None = None,
                                batch: int = 50_000) -> AlgebraCheck:
    """Sample random vectors and measure how far the speed bound is from failing.

    For photons, ``u, w`` in C^3 are drawn and the excess
    ``Σ_k (u†S_k u - w†S_k w)^2 - (|u|^2 + |w|^2)^2`` is reported relative to
    the right-hand side.  For fermions ``z`` in C^4 is drawn and the excess of
    ``Σ_k (z†γ⁰γ^k z)^2`` over ``(z†z)^2`` is reported, together with the
    relative residual of the closed-form gap ``4|z0 z̄2 + z1 z̄3|^2``.
    Returns the maxima over all samples; a negative excess means the bound
    held with room to spare.
    """
    components(species)
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng() if rng is None else rng
    worst = -np.inf
    ident = 0.0 if species == "fermion" else None
    done = 0
    while done < samples:
        s = min(batch, samples - done)
        if species == "photon":
            u, w = _complex_normal(rng, (s, 3)), _complex_normal(rng, (s, 3))
            diff = _expect(SPIN1, u) - _expect(SPIN1, w)
            lhs = np.sum(diff**2, axis=1)
            rhs = (np.sum(np.abs(u) ** 2, axis=1) + np.sum(np.abs(w) ** 2, axis=1)) ** 2
        else:
            z = _complex_normal(rng, (s, 4))
            lhs = np.sum(_expect(DIRAC_ALPHA, z) ** 2, axis=1)
            rhs = np.sum(np.abs(z) ** 2, axis=1) ** 2
            gap = 4 * np.abs(z[:, 0] * z[:, 2].conj() + z[:, 1] * z[:, 3].conj()) ** 2
            ident = max(ident, float(np.max(np.abs(rhs - lhs - gap) / rhs)))
        worst = max(worst, float(np.max((lhs - rhs) / rhs)))
        done += s
    return AlgebraCheck(species, samples, worst, ident)
