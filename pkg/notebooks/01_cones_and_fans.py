# %% [markdown]
# # Nilpotent cones, weight filtrations and the quotient fan
#
# Walk through the exact side on the bundled two-parameter dataset `p4p4`:
# logarithms of the point monodromies, the weight filtration of the cone they span,
# the LCSL test, the coupling tensor, and the fan obtained by gluing the cones
# of the three boundary points modulo the operators that kill W_2.

# %%
from nilcone import load_case
from nilcone.cones import cone_chain, quotient_fan
from nilcone.figures import emit_fan_svg
from nilcone.hodge import cone_filtration, extract_couplings, lcsl_verify, reference_nilpotent

ds = load_case("p4p4")
print(ds.name, "dimension", ds.dimension, "points", list(ds.points))

# %% [markdown]
# The logs are exact: `(T - I)^4 = 0`, so the series stops after three terms.

# %%
n1, n2 = (ds.matrix_log(g) for g in ds.points["o1"]["generators"])
print(n1)

# %% [markdown]
# Any interior point of the cone gives the same filtration; the dimensions of
# W_0, W_2, W_4, W_6 are 1, 3, 5, 6.

# %%
for lam in ((1, 1), (1, 7), (5, 2)):
    print(lam, cone_filtration([n1, n2], 3, list(lam)).dims())
rep = lcsl_verify(ds, "o1")
print("LCSL:", rep.verdict, "m =", rep.m_matrix, "det", rep.m_det)

# %%
print("couplings", extract_couplings([n1, n2], reference_nilpotent(ds)).as_tuple())

# %% [markdown]
# Gluing: the cones at the three points, transported by the connection matrices,
# meet along shared rays. Modulo I_2 they become a two-dimensional fan whose
# chambers accumulate on two irrational rays.

# %%
chain = cone_chain(ds, -4, 4)
fan = quotient_fan(chain)
print(len(fan.rays), "rays; chamber determinants", set(fan.chamber_dets()))
print("orbit matrix", fan.orbit_matrix)
for ray in fan.closure:
    print("limit ray slope", ray.slope(), "≈", float(ray.slope()))

# %%
print(emit_fan_svg(fan, "p4p4_fan.svg", "p4p4, depth 4"))
