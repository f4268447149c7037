"""Connes distances between point states and between general states.

Each distance is reported as a certified bracket: a feasible element of
the Lipschitz ball gives the lower end, a dual matrix the upper end.
"""
# %%
from spectral_cantor.connes_distance import (
    brute_force_oracle,
    connes_distance,
    point_distance_profile,
    point_state,
    uniform_state,
)
from spectral_cantor.dirac import DiracSpec
from spectral_cantor.gns_cantor import build_triple

# %%
# At level 2 an exhaustive search is feasible and agrees with the solver.
t2 = build_triple(2, DiracSpec.geometric(0.5))
phi, psi = point_state("00", 2), point_state("01", 2)
res = connes_distance(t2, phi, psi)
print(res.value, res.upper_bound, brute_force_oracle(t2, phi, psi, grid=200))

# %%
# Point distances depend only on the first disagreement index m. They lie
# between 2 gamma^(m-1) and 2 gamma^(m-1) / (1 - gamma)^2.
g = 0.7
t = build_triple(5, DiracSpec.geometric(g))
for m, r in point_distance_profile(t).items():
    lo, hi = 2 * g ** (m - 1), 2 * g ** (m - 1) / (1 - g) ** 2
    print(f"m={m}: {lo:.4f} <= [{r.value:.6f}, {r.upper_bound:.6f}] <= {hi:.4f}")

# %%
# A point against the uniform measure.
r = connes_distance(t, point_state(0, 5), uniform_state(5))
print("d(chi_0, tau) in", (r.value, r.upper_bound))
