"""The metric delta_gamma on the Cantor group and its standard intervals.

Run with ``python demos/01_cantor_metric.py``.
"""
# %%
import math

import numpy as np

from spectral_cantor.cantor_points import (
    CantorPoint,
    cover_sum,
    delta_gamma,
    first_disagreement,
    standard_interval_of,
)

# Points are finite bit strings, coordinate 1 first.
x = CantorPoint.parse("110")
y = CantorPoint.parse("111")
print("first disagreement:", first_disagreement(x, y))

# %%
# delta_gamma weights the n-th disagreeing coordinate by gamma^(n-1) (1 - gamma),
# so it is squeezed between the first term and gamma^(m-1).
g = 0.5
m = first_disagreement(x, y)
print(f"delta = {delta_gamma(x, y, g):.6f}  in  [{g**(m-1)*(1-g):.6f}, {g**(m-1):.6f}]")

# %%
# The smallest standard interval V(s, n) around a point whose diameter stays
# below a given bound; its diameter is exactly gamma^n.
iv = standard_interval_of(CantorPoint(0), 0.2, g)
print("interval:", iv)

# %%
# Covering by all 2^n level-n intervals with exponent t = log 2 / (-log gamma)
# gives a t-sum of exactly 1 at every level.
for gamma in (1 / 3, 0.5, 0.8):
    t = math.log(2) / -math.log(gamma)
    print(gamma, [round(cover_sum(n, t, gamma), 15) for n in (1, 10, 40)])

# %%
# A small distance matrix.
pts = [CantorPoint.from_code(c, 3) for c in range(8)]
D = np.array([[delta_gamma(a, b, 1 / 3) for b in pts] for a in pts])
np.set_printoptions(precision=3, suppress=True)
print(D)
