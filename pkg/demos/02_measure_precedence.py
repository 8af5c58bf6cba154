# Deciding whether one distribution of particle configurations can evolve
# into another without any particle outrunning light.
# Run: python demos/02_measure_precedence.py

# %%
from fractions import Fraction

import numpy as np

from multicausal import (ModelParams, SliceMeasure, check_equivalences, oracle_subset_condition,
                         precedes_measures)
from multicausal.fixtures import blocked_matching
from multicausal.instances import random_instance
from multicausal.seeding import rng_for

line = ModelParams(c=1.0, n=1, N=1)
half = Fraction(1, 2)

# %% two atoms that can each reach exactly one later atom
mu = SliceMeasure(0.0, [[[0.0]], [[10.0]]], [half, half], line, exact=True)
nu = SliceMeasure(1.0, [[[0.5]], [[10.5]]], [half, half], line, exact=True)
cert = precedes_measures(mu, nu)
print("verdict:", cert.verdict)
print("coupling:\n", cert.witness.dense().astype(float))

# %% three atoms where singletons are fine but a pair is stuck
mu, nu = blocked_matching()
cert = precedes_measures(mu, nu)
print("verdict:", cert.verdict, "| stuck atoms:", cert.violator.tolist(),
      f"| mass {cert.violator_mu_mass} but only {cert.violator_nu_mass} reachable")
print("subset enumeration agrees:", oracle_subset_condition(mu, nu).violator.tolist())

# %% every implemented test on a random two-particle instance
rng = rng_for(1)
mu, nu = random_instance(rng, ModelParams(c=1.0, n=2, N=2), "perturbed", exact=True)
for key, val in sorted(check_equivalences(mu, nu, rng).items()):
    print(f"  {key:28s} {val}")

# %% flow and enumeration on a few hundred random instances
agree = 0
for i in range(300):
    rng = rng_for(2, i)
    params = ModelParams(c=1.0, n=int(rng.integers(1, 4)), N=int(rng.integers(1, 4)))
    kind = ["feasible", "infeasible", "perturbed", "random"][i % 4]
    mu, nu = random_instance(rng, params, kind, exact=bool(i % 2))
    agree += precedes_measures(mu, nu).verdict == oracle_subset_condition(mu, nu).verdict
print("agreement:", agree, "/ 300")

# %% float weights are compared with a small tolerance, exact ones with none
w = np.full(3, 1 / 3)
a = SliceMeasure(0.0, [[[0.0]], [[1.0]], [[2.0]]], w, line)
print("float self-precedence:", precedes_measures(a, a).verdict)
