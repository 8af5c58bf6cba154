import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multicausal.errors import DimensionError, ResourceLimitError
from multicausal.wave.algebra import velocity_operators
from multicausal.wave.propagation import (CIRCULAR_POLARIZATION, GridSpec, SingleParticleMode,
                                          gaussian_mode, plane_wave_mode)
from multicausal.wave.simulate import default_coefficients
from multicausal.wave.state import FactorizedWaveState, assemble_density

G4 = GridSpec(4, 4.0)


def random_modes(rng, species, K, grid=G4):
    d = 6 if species == "photon" else 4
    return [SingleParticleMode(species, grid, rng.standard_normal((d,) + grid.shape)
                               + 1j * rng.standard_normal((d,) + grid.shape))
            for _ in range(K)]


def random_coeffs(rng, species, K, N):
    C = rng.standard_normal((K,) * N) + 1j * rng.standard_normal((K,) * N)
    out = np.zeros_like(C)
    for perm in itertools.permutations(range(N)):
        sign = 1
        if species == "fermion":
            sign = round(np.linalg.det(np.eye(N)[list(perm)]))
        out += sign * np.transpose(C, perm)
    return out


def joint_field(state):
    """Ψ on the full joint grid, shape (d,)*N + (M³,)*N, built explicitly."""
    f = [m.field.reshape(m.field.shape[0], -1) for m in state.modes]
    K, N = len(f), state.N
    d, P = f[0].shape
    psi = np.zeros((d,) * N + (P,) * N, dtype=complex)
    for alpha in itertools.product(range(K), repeat=N):
        term = np.array(1.0 + 0j)
        for a in alpha:
            term = np.multiply.outer(term, f[a])
        # term axes: (d, P, d, P, ...) -> (d, d, ..., P, P, ...)
        order = [2 * j for j in range(N)] + [2 * j + 1 for j in range(N)]
        psi += state.coeffs[alpha] * np.transpose(term, order)
    return psi


def brute_density(state):
    psi = joint_field(state)
    N = state.N
    rho = np.sum(np.abs(psi) ** 2, axis=tuple(range(N)))
    ops = velocity_operators(state.species)
    cur = np.zeros((N, 3) + rho.shape)
    for j in range(N):
        for k in range(3):
            applied = np.moveaxis(np.tensordot(ops[k], psi, axes=([1], [j])), 0, j)
            cur[j, k] = np.sum(psi.conj() * applied, axis=tuple(range(N))).real
    return rho, cur


def to_grid(a, M, N):
    return a.reshape(a.shape[:-N] + (M,) * (3 * N))


@pytest.mark.parametrize("species,N,K", [("photon", 2, 3), ("fermion", 2, 3), ("photon", 1, 2),
                                         ("fermion", 3, 3)])
def test_density_and_current_match_explicit_joint_field(species, N, K):
    rng = np.random.default_rng(7)
    state = FactorizedWaveState(species, random_modes(rng, species, K),
                                random_coeffs(rng, species, K, N))
    snap = assemble_density(state)
    rho, cur = brute_density(state)
    rho, cur = to_grid(rho, 4, N), to_grid(cur, 4, N)
    assert np.allclose(snap.density, rho, rtol=1e-10, atol=1e-14)
    assert snap.total_mass() == pytest.approx(1.0, abs=1e-12)
    mask = rho > 1e-14 * rho.max()
    assert np.allclose(snap.velocity[:, :, mask], cur[:, :, mask] / rho[mask], atol=1e-10)
    assert snap.max_speed() <= 1 + 1e-9


def test_coarsening_is_exact_cell_average():
    rng = np.random.default_rng(8)
    state = FactorizedWaveState("photon", random_modes(rng, "photon", 2),
                                random_coeffs(rng, "photon", 2, 2))
    fine = assemble_density(state)
    coarse = assemble_density(state, coarsen=2)
    avg = fine.density.reshape([2, 2] * 6).mean(axis=tuple(range(1, 12, 2)))
    assert np.allclose(coarse.density, avg, rtol=1e-12)
    cur = (fine.density * fine.velocity).reshape((2, 3) + (2, 2) * 6)
    cur = cur.mean(axis=tuple(range(3, 14, 2)))
    assert np.allclose(coarse.density * coarse.velocity, cur, atol=1e-14)
    assert coarse.spacing == 2.0 and coarse.origin == pytest.approx(-1.5)


def test_circular_packet_moves_along_z():
    g = GridSpec(16, 16.0)
    state = FactorizedWaveState("photon", [gaussian_mode("photon", g, CIRCULAR_POLARIZATION)],
                                np.array([1.0]))
    snap = assemble_density(state)
    live = snap.density > 1e-14 * snap.density.max()
    assert np.allclose(snap.velocity[0, 2][live], 1.0)
    assert np.allclose(snap.velocity[0, :2][:, live], 0.0)


def test_fermion_spinor_plane_wave_moves_at_minus_c():
    mode = plane_wave_mode("fermion", G4, [1, 0, 0, 0], (0, 0, 1))
    snap = assemble_density(FactorizedWaveState("fermion", [mode], np.array([1.0])))
    assert np.allclose(snap.velocity[0, 2], -1.0)
    assert np.allclose(snap.velocity[0, :2], 0.0)


@given(st.integers(0, 2**32), st.sampled_from(["photon", "fermion"]))
def test_density_symmetric_under_particle_exchange(seed, species):
    rng = np.random.default_rng(seed)
    state = FactorizedWaveState(species, random_modes(rng, species, 3),
                                random_coeffs(rng, species, 3, 2))
    snap = assemble_density(state)
    assert np.allclose(snap.swapped(0, 1), snap.density, rtol=1e-10, atol=1e-16)
    assert snap.max_speed() <= 1 + 1e-9


@given(st.integers(0, 2**32))
def test_evolution_keeps_coefficients_and_norm(seed):
    rng = np.random.default_rng(seed)
    state = FactorizedWaveState("fermion", random_modes(rng, "fermion", 2),
                                random_coeffs(rng, "fermion", 2, 2))
    later = state.evolve(0.1).evolve(0.1)
    assert np.array_equal(later.coeffs, state.coeffs)
    assert later.joint_norm() == pytest.approx(1.0, abs=1e-10)
    assert later.time == pytest.approx(0.2)


def test_symmetry_validation():
    rng = np.random.default_rng(0)
    modes = random_modes(rng, "photon", 2)
    with pytest.raises(ValueError):
        FactorizedWaveState("photon", modes, np.array([[1.0, 0.0], [1.0, 0.0]]))
    fmodes = random_modes(rng, "fermion", 2)
    with pytest.raises(ValueError):
        FactorizedWaveState("fermion", fmodes, default_coefficients("photon", 2))
    with pytest.raises(ValueError):
        # two fermions in one mode: the antisymmetric tensor vanishes
        FactorizedWaveState("fermion", fmodes[:1], np.zeros((1, 1)))
    with pytest.raises(DimensionError):
        FactorizedWaveState("photon", modes, np.ones((3, 3)))


def test_memory_guard(monkeypatch):
    g = GridSpec(16, 16.0)
    modes = [gaussian_mode("photon", g, CIRCULAR_POLARIZATION)] * 2
    state = FactorizedWaveState("photon", modes, np.ones((2, 2)))
    with pytest.raises(ResourceLimitError, match="coarsen"):
        assemble_density(state, budget=1 << 20)
    monkeypatch.setenv("MULTICAUSAL_MEMORY_BUDGET", "1000")
    with pytest.raises(ResourceLimitError):
        assemble_density(state, coarsen=2)
    with pytest.raises(ValueError):
        assemble_density(state, coarsen=3)
