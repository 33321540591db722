"""A charged particle in a constant magnetic field, in velocity coordinates.

Run with ``python3 demos/01_magnetic_particle.py``.
"""

from ncquant.repcheck import builtin_rep, check_representation
from ncquant.solver import impose_heisenberg, solve_quantization
from ncquant.sysio import format_system, load_example, render_result

spec = load_example("magnetic_particle")
print(format_system(spec))

# With no extra condition the velocities may fail to commute by any real
# multiple of i*hbar; the label k names that multiple.
family = solve_quantization(spec)
print(render_result(family).decode())

# Asking for the energy to generate the motion fixes k.
pinned = impose_heisenberg(family, spec.integral("H"))
print("after requiring the Heisenberg form with H:")
print(render_result(pinned).decode())

# Numbers: truncated ladder matrices of size 20, ignoring the top two levels
# where truncation spoils the commutator.
q, B, c, m = 1.0, 2.0, 1.0, 1.0
values = {"q": q, "B": B, "c": c, "m": m, "hbar": 1.0}
rep = builtin_rep(
    "truncated_ladder_pair", 20, values, generators=("v_x", "v_y"), scale=q * B / (m * m * c), edge_margin=2
)
report = check_representation(pinned, rep)
print("\n".join(report.lines()))
print("all residuals below", report.tol, ":", report.passed)
