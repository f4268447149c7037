"""The truncated spectral triple of the Cantor group.

The level-N algebra acts on 2^N functions; the Dirac operator is diagonal
in the Walsh basis with eigenvalue alpha_n on the functions of "degree" n.
"""
# %%
import numpy as np

from spectral_cantor.dirac import DiracSpec, eigenvalue_condition_check
from spectral_cantor.gns_cantor import build_triple, commutator_norm, conditional_expectation, symmetry

N, g = 6, 0.5
t = build_triple(N, DiracSpec.geometric(g))
vals, counts = np.unique(t.dirac_diag, return_counts=True)
print("eigenvalues and multiplicities:", dict(zip(vals, counts)))

# %%
# The symmetries s_n = 2 e_n - 1 have commutator norm gamma^(1-n).
for n in range(1, N + 1):
    print(n, commutator_norm(t, symmetry(n, N)), g ** (1 - n))

# %%
# The eigenvalue gaps give the beta_n, whose sum bounds the diameter of the
# Lipschitz ball. For the geometric rule the sum is (1 - gamma)^-2.
print("sum of beta:", eigenvalue_condition_check(DiracSpec.geometric(g), 60))

# %%
# Conditional expectations pi_k average out the coordinates beyond k.
rng = np.random.default_rng(1)
from spectral_cantor.gns_cantor import AlgebraElement

a = AlgebraElement(rng.standard_normal(1 << N))
a = a / commutator_norm(t, a)
for k in range(N + 1):
    step = (a - conditional_expectation(t, a, k)).sup_norm()
    print(f"||a - pi_{k}(a)|| = {step:.4f}")
