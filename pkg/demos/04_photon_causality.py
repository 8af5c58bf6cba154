# Free photons and electrons on a periodic grid: velocities stay below c,
# the density obeys a continuity equation, and the evolution certifies as
# causal, while a density dragged at twice the speed of light does not.
# Run: python demos/04_photon_causality.py   (about a minute)

# %%
import numpy as np

from multicausal.wave import (WaveRunConfig, boosted_snapshots, certify_causal_evolution,
                              check_subluminality_algebra, continuity_residual, default_state,
                              simulate, translated_gaussian)

# %% the pointwise bound behind everything below
for species in ("photon", "fermion"):
    res = check_subluminality_algebra(species, 100_000, np.random.default_rng(0))
    print(f"{species}: worst relative excess {res.max_relative_excess:.3f}")

# %% second-order convergence of the discrete continuity residual
v = [[0.6, 0.3, -0.2]]
res = [continuity_residual(translated_gaussian(0, m, 16.0, v), translated_gaussian(dt, m, 16.0, v))
       for m, dt in [(16, 0.2), (32, 0.1), (64, 0.05)]]
print("residuals:", ["%.2e" % r for r in res])

# %% two photons in a symmetric state
cfg = WaveRunConfig(species="photon", N=2)
run = simulate(cfg)
print(f"max speed {run.max_speed():.6f}, norm drift {run.max_norm_drift():.1e}, "
      f"wrap flagged: {run.wrap_flagged}")
rep = certify_causal_evolution(run.snapshots)
print("certified:", rep.verdict, "| max escaped mass %.2e" % rep.max_escaped())

# %% the same packet moved rigidly at 2c
cfg1 = WaveRunConfig(species="photon", N=1)
fake = boosted_snapshots(default_state(cfg1), cfg1.dt, 40)
rep = certify_causal_evolution(fake)
first = rep.failures()[0]
print("boosted certified:", rep.verdict, f"| first failure at pair ({first.i}, {first.j}),",
      len(first.certificate.violator), "stuck atoms")
