"""M_n with the flip projection: the Connes metric is the norm distance."""
# %%
import numpy as np

from spectral_cantor.matrix_triple import (
    flip_commutator_norm,
    maximize_spread_ball,
    random_matrix_state,
    random_self_adjoint,
    spread_half,
    state_norm_distance,
    verify_unithm,
)

rng = np.random.default_rng(0)
a = random_self_adjoint(5, rng)
print(flip_commutator_norm(a), spread_half(a))

# %%
# The supremum over the unit ball is attained by the sign of rho_phi - rho_psi;
# a generic optimiser finds the same value.
phi, psi = random_matrix_state(3, rng), random_matrix_state(3, rng)
lower, upper, _ = maximize_spread_ball(phi, psi)
print(state_norm_distance(phi, psi), lower, upper)

# %%
print(verify_unithm(6, trials=10).as_dict())
