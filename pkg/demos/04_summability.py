"""Traces of |D|^-s and the summability threshold log 2 / (-log gamma)."""
# %%
from spectral_cantor.dirac import DiracSpec
from spectral_cantor.summability import (
    UhfParams,
    af_recipe_spec,
    geometric_trace_closed_form,
    summability_threshold,
    trace_power,
    trace_resolvent,
    uhf_dirac_specs,
    uhf_multiplicity,
)

# %%
g = 0.5
spec = DiracSpec.geometric(g)
for s in (0.9, 1.0, 1.5, 2.0):
    r = trace_power(spec, s, 200)
    print(s, r.verdict, r.partial_sum, geometric_trace_closed_form(g, s, 200))
print("threshold:", summability_threshold(g))

# %%
# The general recipe alpha_n = dim(A_n)^t keeps the resolvent trace below 2.
for p in (0.5, 1.0, 2.0):
    spec, t = af_recipe_spec(p, 10_000)
    r = trace_resolvent(spec, p, 10_000, mult=lambda n: 1.0)
    print(f"p={p}, t={t}: {r.partial_sum:.6f}")

# %%
# UHF algebras: eigenvalues m_n^s with multiplicities m_n^2 - m_(n-1)^2.
params = UhfParams.car(20)
spec = uhf_dirac_specs(params, s=3)["power"]
print(trace_resolvent(spec, 1.0, 20, mult=uhf_multiplicity(params)))
