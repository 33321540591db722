"""An oscillator with coordinate-dependent mass; the equations need 1/(1 + lam x^2).

Run with ``python3 demos/04_nonlinear_oscillator.py``.
"""

from ncquant.dynamics import apply, inner_derivation
from ncquant.solver import impose_heisenberg, solve_quantization
from ncquant.sysio import format_expr, load_example, render_result

spec = load_example("nonlinear_oscillator")
for name, expr in spec.denominators:
    print(f"{name} = 1/({format_expr(expr)})")
family = solve_quantization(spec)
print(render_result(family).decode())

# k scales the commutator and p1 is an hbar^2 rescaling of the same shape.
member = family.specialize({"k": 1, "p1": 0})
y, d = spec.element("y"), spec.element("d")
print("[y, x] =", member.table.commutator(y, spec.element("x"), 2))
print("[y, d] =", member.table.commutator(y, d, 2))

# The solver's own integral already generates the motion. Second-order
# corrections to the equations were left at zero.
own = impose_heisenberg(member, member.integrals["H"])
print("\nwith the solved integral as Hamiltonian:")
print("  y' =", own.derivation.image("y"))

# Adding hbar^2 lam (d - 1/2) to the Hamiltonian is another admissible
# choice; it adds 2 lam^2 hbar^2 d x to y'.
H = spec.element("(y^2 + omega^2*x^2)*d/2 + i*hbar*lam*d*x*y + hbar^2*lam*(d - 1/2)")
alt = impose_heisenberg(member, H)
print("\nwith H =", H)
print("  y' =", alt.derivation.image("y"))
print("  H is conserved:", apply(alt.derivation, H, 2).is_zero())
print("  the derivation is inner:", inner_derivation(H, alt.table, 2) == alt.derivation)
print("  H belongs to the solved integral family:", alt.integral_families["H"].match(H) is not None)
