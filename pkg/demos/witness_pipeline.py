# Step through the construction for a random pair and draw it.
import json
import warnings

import numpy as np

from cenbm.errors import ProofViolation
from cenbm.geometry import random_convex_polygon
from cenbm.render import render_trace, write
from cenbm.witness import ChainGapWarning, construct, trace_points

C = random_convex_polygon(9, seed=4)
D = random_convex_polygon(14, seed=5)

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always", ChainGapWarning)
    try:
        w, trace = construct(C, D)
        print("lambda", w.lam, "swapped", w.swapped)
    except ProofViolation as exc:
        trace = exc.trace
        print("final containments failed; the maps still certify", exc.certified_ratio)

# %% normalized centroids and the homothety ratio
print("(p, q) =", trace.p, trace.q, " (r, s) =", trace.r, trace.s, " rho =", trace.rho)
for name, pt in trace_points(trace).items():
    print(f"{name:>8}", np.round(pt, 6))

# %% intermediate hexagon links, as diagnostics
print(json.dumps(trace.diagnostics.get("links", {}), indent=1))
for c in caught:
    print("gap:", c.message)

write(render_trace(trace.to_json()), "witness.svg")
print("wrote witness.svg")
