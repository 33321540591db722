"""The fourth-order Pais-Uhlenbeck oscillator written as four first-order equations.

Run with ``python3 demos/03_pais_uhlenbeck.py``.
"""

from ncquant.coeffs import ParamRatio, declare
from ncquant.dynamics import inner_derivation
from ncquant.solver import solve_quantization
from ncquant.sysio import load_example, render_result

spec = load_example("pais_uhlenbeck")
family = solve_quantization(spec)
print(render_result(family).decode())

# The two labels f and g survive every condition. Neither the equations nor
# the two integrals pick up hbar terms.
gt = family.gt
for i, a in enumerate(gt.names):
    for b in gt.names[i + 1:]:
        c = family.table.commutator(gt.gen(a), gt.gen(b), 1)
        if not c.is_zero():
            print(f"[{a}, {b}] =", c)

# A Hamiltonian built from H1 and H2 needs to divide by expressions in f and g.
# Free parameters are never inverted, so trade them for generic constants first.
declare("f0")
declare("g0")
F, G = ParamRatio.symbol("f0"), ParamRatio.symbol("g0")
w1, w2 = ParamRatio.symbol("w1") ** 2, ParamRatio.symbol("w2") ** 2
member = family.specialize({"f": F, "g": G})
H = (member.integrals["H1"].scale(-F) + member.integrals["H2"].scale(G)).scale(
    ParamRatio.const(1) / ((F * w1 + G) * (F * w2 + G))
)
D = inner_derivation(H, member.table, 1)
print("\nH =", H)
for name in gt.names:
    print(f"(1/i hbar)[{name}, H] reproduces {name}':", D.image(name) == member.derivation.image(name))
