"""Command line front end: ``ncquant <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .dynamics import formal_flow
from .repcheck import RepError, check_representation, load_rep
from .solver import QuantizationError, check_table_consistency, impose_heisenberg, solve_quantization
from .sysio import EXAMPLES, ParseError, EvalError, element_string, load_example, parse_system, render_result
from .sysio import _inline

COMMANDS = ("quantize", "integrals", "check-rep", "consistency", "list-examples", "flow")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    example: str | None
    file: str | None
    order: int | None
    table_degree: int | None
    deriv_degree: int | None
    integral_degree: int | None
    hermiticity: bool
    heisenberg: bool
    hamiltonian: str | None
    fmt: str
    rep: str | None
    tol: float
    edge_margin: int | None
    flow_order: int

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            command=ns.command,
            example=getattr(ns, "example", None),
            file=getattr(ns, "file", None),
            order=getattr(ns, "order", None),
            table_degree=getattr(ns, "table_degree", None),
            deriv_degree=getattr(ns, "deriv_degree", None),
            integral_degree=getattr(ns, "integral_degree", None),
            hermiticity=not getattr(ns, "no_hermiticity", False),
            heisenberg=getattr(ns, "heisenberg", False),
            hamiltonian=getattr(ns, "hamiltonian", None),
            fmt=ns.format,
            rep=getattr(ns, "rep", None),
            tol=getattr(ns, "tol", 1e-10),
            edge_margin=getattr(ns, "edge_margin", None),
            flow_order=getattr(ns, "flow_order", 3),
        )


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncquant", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, system=True):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        if not system:
            return
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--example", metavar="NAME")
        src.add_argument("--file", metavar="PATH")
        sp.add_argument("--order", type=int, metavar="K", help="hbar order cap")
        sp.add_argument("--table-degree", type=int, metavar="D")
        sp.add_argument("--deriv-degree", type=int, metavar="D")
        sp.add_argument("--integral-degree", type=int, metavar="D")
        sp.add_argument("--no-hermiticity", action="store_true")
        sp.add_argument("--heisenberg", action="store_true", help="require an inner derivation")
        sp.add_argument("--hamiltonian", metavar="NAME", help="integral name or expression")

    common(sub.add_parser("quantize", help="solve for the quantized family"))
    common(sub.add_parser("integrals", help="quantum corrections of the declared integrals"))
    sp = sub.add_parser("check-rep", help="check the solution in a matrix representation")
    common(sp)
    sp.add_argument("--rep", metavar="FILE", required=True)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--edge-margin", type=int, metavar="M")
    common(sub.add_parser("consistency", help="check associativity of the solved table"))
    common(sub.add_parser("list-examples", help="list built-in systems"), system=False)
    sp = sub.add_parser("flow", help="formal time flow of the generators")
    common(sp)
    sp.add_argument("--flow-order", type=int, default=3, metavar="M")
    return p


def _load(cfg: RunConfig):
    if cfg.example is not None:
        try:
            return load_example(cfg.example)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from exc
    path = Path(cfg.file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_system(text)


def _hamiltonian(spec, cfg: RunConfig):
    names = [n for n, _ in spec.integrals]
    sel = cfg.hamiltonian
    if sel is None:
        if not names:
            raise UsageError("--heisenberg needs an integral or --hamiltonian")
        sel = "H" if "H" in names else names[0]
    if sel in names:
        return spec.integral(sel)
    return spec.element(sel)


def _solve(cfg: RunConfig):
    spec = _load(cfg)
    overrides = {
        k: v
        for k, v in (
            ("K", cfg.order),
            ("D_table", cfg.table_degree),
            ("D_deriv", cfg.deriv_degree),
            ("D_integral", cfg.integral_degree),
        )
        if v is not None
    }
    if not cfg.hermiticity:
        overrides["hermiticity"] = False
    result = solve_quantization(spec, spec.config(**overrides))
    if cfg.heisenberg:
        result = impose_heisenberg(result, _hamiltonian(spec, cfg))
    return spec, result


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _integrals(result, fmt: str) -> str:
    if fmt == "json":
        return _dump({
            n: {
                "value": element_string(e),
                "constraints": result.integral_families[n].constraint_strings(),
            }
            for n, e in result.integrals.items()
        })
    lines = []
    for n, e in result.integrals.items():
        lines.append(f"{n} = {_inline(e) if not e.is_zero() else '0'}")
        for c in result.integral_families[n].constraint_strings():
            lines.append(f"  conserved when {c}")
    return "\n".join(lines) + "\n" if lines else "no integrals declared\n"


def _consistency(result, fmt: str) -> tuple[int, str]:
    report = check_table_consistency(result.table, result.K)
    if fmt == "json":
        body = {
            "consistent": report.consistent,
            "checked": report.checked,
            "cap": report.cap,
            "violations": [
                {"triple": list(t), "residual": element_string(r)} for t, r in report.violations
            ],
        }
        return (0 if report.consistent else 2), _dump(body)
    lines = [report.summary()]
    for (a, b, c), r in report.violations[1:]:
        lines.append(f"  ({a} {b}) {c} - {a} ({b} {c}) = {r}")
    return (0 if report.consistent else 2), "\n".join(lines) + "\n"


def _flow(result, M: int, fmt: str) -> str:
    fl = formal_flow(result.derivation, M, result.K)
    if fmt == "json":
        return _dump({n: [element_string(c) for c in fl[n]] for n in result.gt.names})
    lines = [f"coefficients of t^m/m! up to m = {M}"]
    for n in result.gt.names:
        lines.append(f"{n}:")
        for m, c in enumerate(fl[n]):
            lines.append(f"  [{m}] {_inline(c) if not c.is_zero() else '0'}")
    return "\n".join(lines) + "\n"


def _check_rep(cfg: RunConfig, result) -> tuple[int, str]:
    rep = load_rep(cfg.rep)
    if cfg.edge_margin is not None:
        rep.edge_margin = cfg.edge_margin
    report = check_representation(result, rep, cfg.tol)
    if cfg.fmt == "json":
        return (0 if report.passed else 2), _dump(report.to_json())
    lines = report.lines() + [f"{'passed' if report.passed else 'failed'} at tol {cfg.tol:g}"]
    return (0 if report.passed else 2), "\n".join(lines) + "\n"


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Return ``(exit code, rendered output)``; diagnostics are part of the output."""
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        return (0 if exc.code == 0 else 1), ""
    cfg = RunConfig.from_args(ns)
    try:
        if cfg.command == "list-examples":
            if cfg.fmt == "json":
                return 0, _dump(sorted(EXAMPLES))
            return 0, "\n".join(sorted(EXAMPLES)) + "\n"
        spec, result = _solve(cfg)
        if cfg.command == "quantize":
            return 0, render_result(result, cfg.fmt).decode()
        if cfg.command == "integrals":
            return 0, _integrals(result, cfg.fmt)
        if cfg.command == "consistency":
            return _consistency(result, cfg.fmt)
        if cfg.command == "flow":
            if cfg.flow_order < 0:
                raise UsageError("--flow-order must be nonnegative")
            return 0, _flow(result, cfg.flow_order, cfg.fmt)
        return _check_rep(cfg, result)
    except ParseError as exc:
        return 1, _error(cfg.fmt, "parse", str(exc), line=exc.line, column=exc.col)
    except (UsageError, EvalError, RepError) as exc:
        return 1, _error(cfg.fmt, "usage", str(exc))
    except QuantizationError as exc:
        return 2, _error(cfg.fmt, type(exc).__name__, str(exc), order=exc.order, where=exc.where)


def _error(fmt: str, kind: str, message: str, **extra) -> str:
    if fmt == "json":
        return _dump({"error": kind, "message": message, **{k: v for k, v in extra.items() if v is not None}})
    lines = [f"error ({kind}): {message}"]
    lines += [f"  {k}: {v}" for k, v in extra.items() if v is not None]
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    code, out = run(argv)
    stream = sys.stdout if code == 0 else sys.stderr
    stream.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
