# From a causal sequence of snapshots to a weighted bundle of worldlines.
# Run: python demos/03_worldline_measures.py

# %%
from fractions import Fraction

from multicausal import (Evolution, ModelParams, SliceMeasure, build_trajectory_measure,
                         evaluate_pushforward, verify_causal_evolution)
from multicausal.errors import NonCausalEvolutionError
from multicausal.instances import inject_jump, random_causal_evolution
from multicausal.seeding import rng_for

line = ModelParams(c=1.0, n=1, N=1)
H, Q = Fraction(1, 2), Fraction(1, 4)

# %% an atom of mass 1/2 splits into two atoms of 1/4
evo = Evolution([
    SliceMeasure(0, [[[0.0]], [[10.0]]], [H, H], line, exact=True),
    SliceMeasure(1, [[[0.0]], [[10.0]]], [H, H], line, exact=True),
    SliceMeasure(2, [[[-0.5]], [[0.5]], [[10.0]]], [Q, Q, H], line, exact=True),
])
sigma = build_trajectory_measure(evo)
for traj, w in sigma.trajectories():
    print(f"  weight {w}: x(t) = {traj.positions[:, 0, 0].tolist()}")

# %% evaluating between grid times interpolates along the segments
print("at t=1.5:", [(float(x[0, 0]), w) for x, w in evaluate_pushforward(sigma, 1.5).atoms()])

# %% random two-particle evolutions round trip exactly
params = ModelParams(c=1.0, n=2, N=2)
ok = 0
for i in range(50):
    evo = random_causal_evolution(rng_for(3, i), params, slices=5, max_atoms=12, exact=True)
    sigma = build_trajectory_measure(evo)
    ok += sigma.segments_causal() and all(
        evaluate_pushforward(sigma, mu.t).same_as(mu) for mu in evo)
print("exact round trips:", ok, "/ 50")

# %% a superluminal jump is caught at the step where it happens
rng = rng_for(4)
evo = inject_jump(rng, random_causal_evolution(rng, params, slices=5), 2)
print("failing pairs:", verify_causal_evolution(evo).failing_pairs())
try:
    build_trajectory_measure(evo)
except NonCausalEvolutionError as err:
    print("construction stops at", err.pair)
