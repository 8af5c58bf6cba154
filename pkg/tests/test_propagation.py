import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multicausal import ModelParams
from multicausal.wave.algebra import DIRAC_ALPHA, GAMMA0, SPIN1
from multicausal.wave.propagation import (CIRCULAR_POLARIZATION, GridSpec, SingleParticleMode,
                                          _propagator, evolve_mode, gaussian_mode,
                                          plane_wave_mode)

G = GridSpec(8, 8.0)


def hamiltonian(species, k, c=1.0, mass=1.0):
    if species == "photon":
        A = np.einsum("kab,k->ab", SPIN1, k)
        H = np.zeros((6, 6), dtype=complex)
        H[:3, :3] = c * A
        H[3:, 3:] = -c * A
        return H
    return c * np.einsum("kab,k->ab", DIRAC_ALPHA, k) + mass * c**2 * GAMMA0


def unitary_by_eigh(H, dt):
    lam, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * lam * dt)) @ V.conj().T


@pytest.mark.parametrize("species", ["photon", "fermion"])
@pytest.mark.parametrize("c,mass", [(1.0, 1.0), (2.0, 0.5)])
def test_propagator_matches_eigendecomposition(species, c, mass):
    dt = 0.07
    U = _propagator(species, G, dt, c, mass)
    k = G.wavenumbers()
    rng = np.random.default_rng(2)
    for idx in [(0, 0, 0), (1, 0, 0), (3, 5, 7), *map(tuple, rng.integers(0, 8, (10, 3)))]:
        kv = k[(slice(None),) + idx]
        want = unitary_by_eigh(hamiltonian(species, kv, c, mass), dt)
        assert np.allclose(U[(slice(None), slice(None)) + idx], want, atol=1e-13)


def test_zero_field_stays_zero():
    zero = SingleParticleMode("photon", G, np.zeros((6,) + G.shape))
    assert np.all(evolve_mode(zero, 0.1).field == 0)


def test_circular_plane_wave_phase():
    k0 = 2 * np.pi * 2 / G.L
    mode = plane_wave_mode("photon", G, CIRCULAR_POLARIZATION, (0, 0, 2))
    dt = 0.05
    out = evolve_mode(mode, dt, ModelParams(c=1.0, n=3, N=1))
    assert np.max(np.abs(out.field - np.exp(-1j * k0 * dt) * mode.field)) <= 1e-10


@pytest.mark.parametrize("species", ["photon", "fermion"])
def test_norm_and_reversibility(species):
    rng = np.random.default_rng(4)
    spinor = rng.standard_normal(6 if species == "photon" else 4) + 0j
    mode = gaussian_mode(species, G, spinor, width=0.8, k0=(0.5, 0, 0))
    assert mode.norm() == pytest.approx(1.0, abs=1e-14)
    cur = mode
    for _ in range(100):
        cur = evolve_mode(cur, 0.05)
        assert abs(cur.norm() - 1.0) <= 1e-10
    back = evolve_mode(evolve_mode(mode, 0.05), 0.05, backward=True)
    assert np.max(np.abs(back.field - mode.field)) <= 1e-10


@given(st.integers(0, 2**32), st.sampled_from(["photon", "fermion"]),
       st.floats(0.01, 0.3))
def test_steps_compose(seed, species, dt):
    rng = np.random.default_rng(seed)
    d = 6 if species == "photon" else 4
    field = rng.standard_normal((d,) + GridSpec(4, 4.0).shape) * (1 + 1j)
    mode = SingleParticleMode(species, GridSpec(4, 4.0), field)
    two = evolve_mode(evolve_mode(mode, dt), dt)
    one = evolve_mode(mode, 2 * dt)
    assert np.allclose(two.field, one.field, atol=1e-12 * np.abs(field).max())


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(12, 8.0)
    with pytest.raises(ValueError):
        GridSpec(2, 8.0)
    with pytest.raises(ValueError):
        GridSpec(8, -1.0)
    with pytest.raises(ValueError):
        evolve_mode(gaussian_mode("photon", G, CIRCULAR_POLARIZATION), 0.0)
    with pytest.raises(ValueError):
        SingleParticleMode("photon", G, np.zeros((4,) + G.shape))
    with pytest.raises(ValueError):
        SingleParticleMode("photon", G, np.full((6,) + G.shape, np.nan))


def test_grid_geometry():
    g = GridSpec(8, 8.0)
    assert g.h == 1.0 and g.cell_volume == 1.0
    assert g.axis()[0] == -4.0 and g.axis()[-1] == 3.0
    k = g.wavenumbers()
    assert k.shape == (3, 8, 8, 8)
    assert k[0, 1, 0, 0] == pytest.approx(2 * np.pi / 8)
