# %% [markdown]
# # Periods, flops and the prepotential
#
# The bidegree (3,3) case carries its two differential operators. We check the
# holomorphic period and the logarithmic Frobenius solutions against them, then
# test the flop identity for the leading Yukawa coupling as an identity of
# rational functions, and finish with the quadratic shift of the prepotential.

# %%
from fractions import Fraction

from nilcone import load_case
from nilcone.exact_core import ExactMatrix
from nilcone.series import (
    flop_invariance_check,
    frobenius_basis,
    instanton_sum,
    picard_fuchs,
    prepotential_shift,
    tangency_multiplicity,
    w0_series,
)

p3 = load_case("p3p3")
ops = picard_fuchs(p3)
w0 = w0_series(10)
print({(n, m): w0.coefficient(n, m) for n in range(3) for m in range(3 - n)})
for name, op in sorted(ops.items()):
    r = op.apply(w0)
    print(name, "kills w0 through degree", r.degree, r.is_zero_through(r.degree))

# %%
basis = frobenius_basis(6, (2, 6, 6, 2))
print(len(basis), "solutions; log degrees", [s.log_degree for s in basis])

# %% [markdown]
# Flop invariance: the instanton sum of the flopped curves, rewritten in the
# inverted coordinate, shifts the classical coupling by an integer.

# %%
flop = p3.section("flop")
jac = ExactMatrix(flop["dtprime_dt"]).inverse()[0, 0]
print("instanton sum:", instanton_sum(flop["n0"]))
print(flop_invariance_check(Fraction(flop["C_prime"]), Fraction(flop["C_flop"]), flop["n0"], jac))

# %%
for case in ("p4p4", "p3p3"):
    print(case, "tangency multiplicity", tangency_multiplicity(load_case(case)))

# %% [markdown]
# The connection matrix between two boundary points moves the prepotential by a
# quadratic form in the A-periods only.

# %%
p4 = load_case("p4p4")
pre = p4.section("prepotential")
form = prepotential_shift(p4.matrix(pre["connection"]), pre["r"])
print(form, "| matrix", form.a_matrix())
