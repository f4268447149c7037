"""Embeddings of the Cantor space into l^1 and R^e, dimension and GH bounds."""
# %%
import io
import math

import numpy as np

from spectral_cantor.fractal_embed import (
    F_gamma_lipschitz,
    box_dimension,
    cantor_cloud,
    e_gamma,
    gh_correspondence_distance,
    gh_upper_bound,
    hausdorff_bounds,
    universal_space_membership,
    write_dimension_csv,
)

# %%
# F_gamma lands in R^e with e = floor(log 2 / -log gamma) + 1. For gamma = 1/3
# this is the middle-thirds Cantor set in [0, 1].
for g in (1 / 3, 0.5, 0.8):
    print(g, "e =", e_gamma(g), "bi-Lipschitz constants", F_gamma_lipschitz(g))
cloud = cantor_cloud(1 / 3, 6, "F")
print(np.sort(cloud.points[:, 0])[:8] * 3**6)

# %%
# Box counting: exact interval counts and a grid count on the l^1 image.
for g in (1 / 3, 0.5, 0.7):
    c = cantor_cloud(g, 14, "f")
    a = box_dimension(c, method="interval").slope
    b = box_dimension(c, method="grid").slope
    print(f"gamma={g:.3f}: interval {a:.9f}, grid {b:.9f}, exact {math.log(2) / -math.log(g):.9f}")

buf = io.StringIO()
write_dimension_csv(box_dimension(cantor_cloud(0.5, 10)), buf)
print(buf.getvalue().splitlines()[:3])

# %%
print(hausdorff_bounds(1 / 3, 10))

# %%
# Gromov-Hausdorff: matching equal bit strings certifies an upper bound.
for g, mu in ((0.5, 0.25), (0.9, 0.1)):
    print(g, mu, gh_correspondence_distance(g, mu, 12), "<=", gh_upper_bound(g, mu))

# %%
# The universal space: e_1 and the scaled images (1 - gamma) f_gamma(C_gamma).
v = 0.25 ** np.arange(1, 6) * 0.75**2 / 0.25 * np.array([1, 0, 1, 1, 0])
print(universal_space_membership(v))
