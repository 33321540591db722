"""Writing a system by hand: a particle under a constant force.

Run with ``python3 demos/05_custom_system.py``.
"""

from ncquant.dynamics import flow_substitute, formal_flow
from ncquant.solver import impose_heisenberg, solve_quantization
from ncquant.sysio import parse_system, render_result

TEXT = """
system falling
constants F
generators x p
evolution
  x' = p
  p' = F
integrals
  H = p^2/2 - F*x
labels
  s = [x, p] @ i*hbar
"""

spec = parse_system(TEXT)
family = solve_quantization(spec)
print(render_result(family).decode())

result = impose_heisenberg(family, spec.integral("H"))
print("Heisenberg form pins", dict(result.pinned))

# The formal flow is a power series in t; here it stops after t^2.
flow = formal_flow(result.derivation, 4, result.K)
for name, coeffs in flow.coefficients.items():
    print(f"{name}(t):", ", ".join(f"[t^{m}/{m}!] {c}" for m, c in enumerate(coeffs)))

# Integrals stay put along the flow: every t-coefficient past the first vanishes.
series = flow_substitute(spec.integral("H"), flow, result.table)
print("H along the flow:", ", ".join(str(c) if not c.is_zero() else "0" for c in series))
