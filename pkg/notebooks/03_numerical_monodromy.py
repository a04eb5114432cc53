# %% [markdown]
# # Numerical monodromy of the (3,3) family
#
# Build the rank-6 first-order system from the two operators, transport a
# fundamental matrix around named loops in ball arithmetic, and compare the
# results with the exact matrices. 128 bits keeps this under a minute; the
# verification suite runs the same loops at 256.

# %%
from nilcone import load_case
from nilcone import transport as tr

PREC = 128
system = tr.p3p3_system()
print("basis", system.basis, "flat", system.is_flat())

# %% [markdown]
# Golden test first: a Gauss equation with c = 1/3 has local exponents 0 and 2/3 at x = 0.

# %%
gauss = tr.loop_monodromy(tr.hypergeometric_system("1/2", "1/2", "1/3"), tr.hypergeometric_loop(), PREC)
target = tr.unipotent_target(2, [(1, 1), (tr.root_of_unity(2, 3, PREC), 1)], PREC)
print("charpoly deviation", tr.charpoly_deviation(gauss.matrix, target))

# %%
spec = load_case("p3p3").section("transport")
loops = {name: tr.p3p3_loop(name, PREC) for name in ("square", "x0", "y0", "e1")}
print("contractible square:", loops["square"].matrix.identity_deviation())
for name in ("x0", "y0", "e1"):
    want = tr.unipotent_target(6, {int(k): v for k, v in spec["loops"][name]["charpoly"].items()}, PREC)
    print(name, "charpoly deviation", tr.charpoly_deviation(loops[name].matrix, want),
          "steps", loops[name].stats.steps)

# %% [markdown]
# The loops around the two coordinate axes commute, as they must near a normal-crossing point.

# %%
mats = {k: v.matrix for k, v in loops.items()}
print(tr.numeric_relation_check(mats, "x0 * y0", "y0 * x0", 1e-20))
