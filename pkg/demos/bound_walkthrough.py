# Why the ratio never exceeds 69/17: the two-variable slice, then the full domain.
from fractions import Fraction

from cenbm.certify import CORNERS, certify_g_max_on_Q, g_dp, g_dr, g_exact, maximize_f_on_domain

# %% g is decreasing in p and increasing in r on the whole rectangle
print("dg/dp at (0,0)", g_dp(0.0, 0.0), " dg/dr at (0,0)", g_dr(0.0, 0.0))

# %% so the maximum sits at a corner; exact values
for name, (p, r) in CORNERS.items():
    print(f"{name:>12}  {g_exact(p, r)}")
assert g_exact(Fraction(0), Fraction(2, 7)) == Fraction(69, 17)

# %% the grid-based certificate
rep = certify_g_max_on_Q(512)
print("max", rep.max_value, "at", rep.argmax, "residual", rep.grid_residual)

# %% four variables: f drops with q and grows with s, so q = s = 0 is the worst case
rep4 = maximize_f_on_domain(samples=200_000)
print("max f", rep4.max_value, "at", rep4.argmax)
print(rep4.monotonicity_checks)
