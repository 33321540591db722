"""The Euler top: quadratic equations, angular-momentum-type commutators.

Run with ``python3 demos/02_euler_top.py``.
"""

from ncquant.coeffs import ParamRatio
from ncquant.repcheck import builtin_rep, check_representation
from ncquant.solver import impose_heisenberg, solve_quantization
from ncquant.sysio import load_example, render_result

spec = load_example("euler_top")
family = solve_quantization(spec)
print(render_result(family).decode())

# The corrected equations are the symmetrized products in disguise.
gt, table = family.gt, family.table
for name, (p, q) in {"L1": ("L2", "L3"), "L2": ("L1", "L3"), "L3": ("L1", "L2")}.items():
    a = ParamRatio.symbol("a" + name[1])
    sym = (table.mul(gt.gen(p), gt.gen(q), 1) + table.mul(gt.gen(q), gt.gen(p), 1)).scale(a / ParamRatio.const(2))
    print(f"{name}' equals a/2 ({p} {q} + {q} {p}):", sym == family.derivation.image(name))

# Which quadratic integral generates the motion? The answer is a set of
# constraints tying b, f and a together.
heis = impose_heisenberg(family, spec.integral("H"))
print("\nconstraints for the Heisenberg form:")
for line in heis.constraint_strings():
    print("  ", line)

# A concrete point: f = (1, 1, 1) makes L the usual angular momentum, and
# a = (1, -1, 0), b = (1, 1, 0) satisfy every constraint above.
values = {"f1": 1, "f2": 1, "f3": 1, "a1": 1, "a2": -1, "a3": 0, "b1": 1, "b2": 1, "b3": 0}
for dim in (2, 5):
    rep = builtin_rep("spin", dim, values, generators=("L1", "L2", "L3"))
    report = check_representation(heis, rep, tol=1e-12)
    print(f"spin matrices of size {dim}: passed={report.passed}, largest residual {report.max_residual:.1e}")
