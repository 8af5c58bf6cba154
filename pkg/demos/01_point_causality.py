# Light cones for several particles at once.
# Run: python demos/01_point_causality.py

# %%
import numpy as np

from multicausal import (CompactRegion, ConfigEvent, ModelParams, chronologically_precedes_point,
                         future_contains, precedes_point, precedes_point_tolerant,
                         slice_future_region)

params = ModelParams(c=1.0, n=3, N=2)

# %% each particle has to stay inside its own cone
p = ConfigEvent(0.0, [[0, 0, 0], [1, 0, 0]])
q = ConfigEvent(1.0, [[0.5, 0, 0], [1, 0.9, 0]])
r = ConfigEvent(1.0, [[0.5, 0, 0], [3, 0, 0]])
print("p -> q:", precedes_point(p, q, params))
print("p -> r:", precedes_point(p, r, params), "(second particle moved 2 in time 1)")

# %% the light-like boundary counts as causal but not as chronological
edge = ConfigEvent(1.0, [[1, 0, 0], [1, 0, 0]])
print("causal:", precedes_point(p, edge, params),
      "chronological:", chronologically_precedes_point(p, edge, params))

# %% a tolerant predicate for gridded data widens every cone by a fixed slack
near = ConfigEvent(1.0, [[1.1, 0, 0], [1, 0, 0]])
print("exact:", precedes_point(p, near, params),
      "slack 0.2:", precedes_point_tolerant(p, near, params, 0.2))

# %% futures of boxes decouple per particle
box = CompactRegion.box(0.0, [[0, 0, 0], [0, 0, 0]], [[1, 1, 1], [1, 1, 1]])
for t, x in [(1.0, 1.5), (0.1, 3.0)]:
    q = ConfigEvent(t, [[x, 0, 0], [0.5, 0.5, 0.5]])
    print(f"q=({t}, {x}, ...) in future of box:", future_contains(box, q, params))

# %% the future of a box on a later slice in one dimension is again an interval
line = ModelParams(c=1.0, n=1, N=1)
fs = slice_future_region(CompactRegion.box(0.0, [[0.0]], [[1.0]]), 2.0, line)
print("future of [0, 1] at t=2:", fs.outer_region().lo.item(), fs.outer_region().hi.item())

# %% a random sweep of the order axioms
rng = np.random.default_rng(0)
pts = [ConfigEvent(rng.integers(0, 3), rng.integers(-2, 3, (2, 3)) / 2) for _ in range(40)]
bad = 0
for a in pts:
    for b in pts:
        for c in pts:
            if precedes_point(a, b, params) and precedes_point(b, c, params):
                bad += not precedes_point(a, c, params)
print("transitivity failures over", len(pts) ** 3, "triples:", bad)
