import numpy as np
import pytest

from multicausal.wave.simulate import (WaveRunConfig, auto_coarsen, default_coefficients,
                                       default_state, simulate, translate_state)
from multicausal.wave.state import assemble_density


@pytest.mark.parametrize("species", ["photon", "fermion"])
def test_short_single_particle_run(species):
    run = simulate(WaveRunConfig(species=species, N=1, steps=10))
    assert len(run.snapshots) == 11 and len(run.series) == 11
    assert run.max_norm_drift() <= 1e-10
    assert run.max_speed() <= 1 + 1e-9
    assert not run.wrap_flagged
    assert all(abs(s.total_mass() - 1) < 1e-10 for s in run.snapshots)


def test_record_every_keeps_last_step():
    run = simulate(WaveRunConfig(N=1, steps=7, record_every=3))
    assert [r["step"] for r in run.series] == [0, 3, 6, 7]


def test_two_photon_density_stays_symmetric():
    run = simulate(WaveRunConfig(N=2, steps=2, coarsen=4))
    for s in run.snapshots:
        assert np.allclose(s.swapped(), s.density, rtol=1e-10, atol=1e-18)


def test_wrap_is_flagged_for_long_runs():
    run = simulate(WaveRunConfig(N=1, M=16, L=8.0, width=1.0, dt=0.25, steps=12))
    assert run.wrap_flagged


def test_default_coefficients_have_the_right_symmetry():
    C = default_coefficients("fermion", 3)
    assert C[0, 1, 2] == 1 and C[1, 0, 2] == -1 and C[0, 0, 1] == 0
    P = default_coefficients("photon", 2)
    assert np.array_equal(P, P.T)


def test_translation_moves_the_density():
    cfg = WaveRunConfig(N=1)
    st = default_state(cfg)
    moved = assemble_density(translate_state(st, (2.0, 0, 0)))
    base = assemble_density(st)
    assert np.allclose(np.roll(base.density, 2, axis=0), moved.density, atol=1e-12)


def test_auto_coarsen_hits_the_cell_target():
    assert auto_coarsen(16, 1) == 1
    assert auto_coarsen(16, 2) == 2
    assert (16 // auto_coarsen(16, 3)) ** 9 <= 2_000_000


def test_config_validation():
    for bad in (dict(dt=0), dict(steps=0), dict(width=3.0), dict(species="gluon"), dict(N=0)):
        with pytest.raises(ValueError):
            WaveRunConfig(**bad)
