# Regular pentagon against a triangle with the same centroid.
import numpy as np

from cenbm.estimate import PENTAGON_TRIANGLE_LAMBDA, estimate_cen, pentagon_triangle_witness
from cenbm.geometry import centroid
from cenbm.render import render_pentagon_triangle, write

pt = pentagon_triangle_witness()
print("T vertices\n", np.round(pt.T.vertices, 6))
print("y =", pt.y)
print("centroids", [centroid(X).round(15) for X in (pt.P, pt.T, pt.Tstar)])
print("ratio (7 - sqrt 5)/2 =", PENTAGON_TRIANGLE_LAMBDA, "verified", pt.verified)

# %% the estimator finds a better position than this explicit one
res = estimate_cen(pt.T, pt.P)
print("estimate", res.lambda_hat)

write(render_pentagon_triangle(), "pentagon_triangle.svg")
print("wrote pentagon_triangle.svg")
