"""System description language, built-in examples and result serialization.

A system file lists sections one per line::

    system magnetic_particle
    constants q B c m
    generators v_x v_y
    evolution
      v_x' = q*B/(m*c)*v_y
      v_y' = -q*B/(m*c)*v_x
    integrals
      H = m*(v_x^2 + v_y^2)/2
    labels
      k = [v_y, v_x] @ i*hbar
    options
      K = 1

Expressions are classical and commutative; ordering happens when they enter
the algebra.  ``#`` starts a comment.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .coeffs import (
    CONSTANT,
    PARAM,
    RATIO_I,
    RATIO_ONE,
    RATIO_ZERO,
    ParamRatio,
    declare,
    is_declared,
    symbol_kind,
)
from .ncalg import GeneratorTable, NCElement, coeff_string

__all__ = [
    "ParseError",
    "SystemSpec",
    "LabelSpec",
    "parse_system",
    "parse_expr",
    "format_system",
    "format_expr",
    "load_example",
    "EXAMPLES",
    "render_result",
    "result_to_json",
    "load_result_json",
    "element_from_string",
]

SECTIONS = (
    "system", "constants", "parameters", "generators", "denominator",
    "evolution", "integrals", "labels", "options",
)
RESERVED = set(SECTIONS) | {"i", "hbar"}
OPTION_KEYS = (
    "K", "D_table", "D_deriv", "D_integral", "den_degree", "table_den_degree", "hermiticity",
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# expressions
#
# ("num", int) | ("sym", name) | ("add", (e, ...)) | ("mul", (e, ...))
# | ("neg", e) | ("pow", e, n) | ("div", e, e)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()\[\],=@']))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int, col0: int = 1) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(_Tok(kind, m.group(kind), line, col0 + start))
        pos = m.end()
    out.append(_Tok("end", "", line, col0 + len(text)))
    return out


class _ExprParser:
    def __init__(self, toks: list[_Tok], known: Mapping[str, str], allow_quantum: bool = False):
        self.toks = toks
        self.k = 0
        self.known = known
        self.allow_quantum = allow_quantum

    def peek(self) -> _Tok:
        return self.toks[self.k]

    def take(self, text: str | None = None) -> _Tok:
        t = self.toks[self.k]
        if text is not None and t.text != text:
            found = t.text or "end of line"
            raise ParseError(f"expected {text!r}, found {found!r}", t.line, t.col)
        self.k += 1
        return t

    def expr(self):
        args = [self.term()]
        while self.peek().text in ("+", "-"):
            op = self.take().text
            t = self.term()
            args.append(t if op == "+" else ("neg", t))
        return args[0] if len(args) == 1 else ("add", tuple(args))

    def term(self):
        left = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            right = self.unary()
            if op == "*":
                if left[0] == "mul":
                    left = ("mul", left[1] + (right,))
                else:
                    left = ("mul", (left, right))
            else:
                left = ("div", left, right)
        return left

    def unary(self):
        if self.peek().text == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            t = self.peek()
            if t.text == "-":
                raise ParseError("exponents must be natural numbers", t.line, t.col)
            if t.kind != "num":
                raise ParseError(f"expected a natural exponent, found {t.text or 'end of line'!r}", t.line, t.col)
            self.take()
            n = int(t.text)
            if n < 1:
                raise ParseError("exponents must be natural numbers", t.line, t.col)
            return ("pow", base, n)
        return base

    def atom(self):
        t = self.peek()
        if t.kind == "num":
            self.take()
            return ("num", int(t.text))
        if t.kind == "id":
            self.take()
            if t.text in ("i", "hbar"):
                if not self.allow_quantum:
                    raise ParseError(f"{t.text!r} is only allowed in labels", t.line, t.col)
                return ("sym", t.text)
            if t.text not in self.known:
                raise ParseError(f"undeclared symbol {t.text!r}", t.line, t.col)
            return ("sym", t.text)
        if t.text == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        raise ParseError(f"unexpected {t.text or 'end of line'!r}", t.line, t.col)


def parse_expr(text: str, known: Mapping[str, str], *, line: int = 1, col: int = 1,
               allow_quantum: bool = False):
    """Parse one expression over the symbols in ``known``."""
    p = _ExprParser(_tokenize(text, line, col), known, allow_quantum)
    e = p.expr()
    t = p.peek()
    if t.kind != "end":
        raise ParseError(f"unexpected {t.text!r}", t.line, t.col)
    return e


_PREC = {"add": 1, "neg": 2, "mul": 3, "div": 3, "pow": 4, "num": 5, "sym": 5}


def format_expr(e) -> str:
    kind = e[0]
    if kind == "num":
        return str(e[1])
    if kind == "sym":
        return e[1]
    if kind == "add":
        out = _wrap(e[1][0], 1)
        for a in e[1][1:]:
            if a[0] == "neg":
                out += " - " + _wrap(a[1], 2)
            else:
                out += " + " + _wrap(a, 2)
        return out
    if kind == "neg":
        return "-" + _wrap(e[1], 2)
    if kind == "mul":
        parts = [_wrap(e[1][0], 3)]
        for a in e[1][1:]:
            parts.append(f"({format_expr(a)})" if a[0] in ("div", "mul", "add") else _wrap(a, 2))
        return "*".join(parts)
    if kind == "div":
        right = e[2]
        r = f"({format_expr(right)})" if _PREC[right[0]] <= 3 else format_expr(right)
        return f"{_wrap(e[1], 3)}/{r}"
    if kind == "pow":
        return f"{_wrap(e[1], 5)}^{e[2]}"
    raise ValueError(f"bad expression node {e!r}")


def _wrap(e, prec: int) -> str:
    s = format_expr(e)
    return f"({s})" if _PREC[e[0]] < prec else s


# ---------------------------------------------------------------------------
# evaluation to commutative polynomials {(h, dens, gens): coeff}


class EvalError(ValueError):
    pass


def _padd(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, RATIO_ZERO) + v
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (h1, d1, g1), c1 in a.items():
        for (h2, d2, g2), c2 in b.items():
            k = (h1 + h2, tuple(x + y for x, y in zip(d1, d2)), tuple(x + y for x, y in zip(g1, g2)))
            s = out.get(k, RATIO_ZERO) + c1 * c2
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
    return out


def _pscale(a: dict, c: ParamRatio) -> dict:
    return {k: v * c for k, v in a.items() if not (v * c).is_zero()}


# ---------------------------------------------------------------------------
# system description


@dataclass(frozen=True)
class LabelSpec:
    """``name`` is the coefficient of ``scale * hbar^h * monomial`` in ``[left, right]``."""

    name: str
    left: str
    right: str
    expr: tuple
    h: int
    dens: tuple[int, ...]
    gens: tuple[int, ...]
    scale: ParamRatio


@dataclass(frozen=True)
class SystemSpec:
    name: str
    constants: tuple[str, ...]
    generators: tuple[str, ...]
    evolution: tuple[tuple[str, tuple], ...]
    parameters: tuple[str, ...] = ()
    denominators: tuple[tuple[str, tuple], ...] = ()
    integrals: tuple[tuple[str, tuple], ...] = ()
    label_defs: tuple[tuple[str, str, str, tuple], ...] = ()
    options: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for c in self.constants:
            declare(c, CONSTANT)
        for p in self.parameters:
            declare(p, PARAM)
        for name, *_ in self.label_defs:
            declare(name, PARAM)

    # -- evaluation ---------------------------------------------------------
    def _zero_key(self):
        return (0, (0,) * len(self.denominators), (0,) * len(self.generators))

    def evaluate(self, e) -> dict:
        """Commutative polynomial of an expression, keyed by ``(h, dens, gens)``."""
        kind = e[0]
        z = self._zero_key()
        if kind == "num":
            return {} if e[1] == 0 else {z: ParamRatio.const(e[1])}
        if kind == "sym":
            n = e[1]
            if n == "i":
                return {z: RATIO_I}
            if n == "hbar":
                return {(1,) + z[1:]: RATIO_ONE}
            if n in self.generators:
                g = [0] * len(self.generators)
                g[self.generators.index(n)] = 1
                return {(0, z[1], tuple(g)): RATIO_ONE}
            dnames = [d for d, _ in self.denominators]
            if n in dnames:
                d = [0] * len(dnames)
                d[dnames.index(n)] = 1
                return {(0, tuple(d), z[2]): RATIO_ONE}
            if n in self.constants or n in self.parameters or is_declared(n):
                return {z: ParamRatio.symbol(n)}
            raise EvalError(f"undeclared symbol {n!r}")
        if kind == "add":
            out: dict = {}
            for a in e[1]:
                out = _padd(out, self.evaluate(a))
            return out
        if kind == "neg":
            return _pscale(self.evaluate(e[1]), -RATIO_ONE)
        if kind == "mul":
            out = {z: RATIO_ONE}
            for a in e[1]:
                out = _pmul(out, self.evaluate(a))
            return out
        if kind == "pow":
            base = self.evaluate(e[1])
            out = {z: RATIO_ONE}
            for _ in range(e[2]):
                out = _pmul(out, base)
            return out
        if kind == "div":
            return _pmul(self.evaluate(e[1]), self._inverse(self.evaluate(e[2])))
        raise EvalError(f"bad expression node {e!r}")

    def _inverse(self, p: dict) -> dict:
        z = self._zero_key()
        if not p:
            raise EvalError("division by zero")
        if set(p) == {z}:
            c = p[z]
            if c.has_params():
                raise EvalError(f"cannot divide by {c}: it contains a free parameter")
            return {z: RATIO_ONE / c}
        for t, (dname, q) in enumerate(self.denominators):
            qp = self.evaluate(q)
            power = dict(qp)
            for n in range(1, 5):
                if set(power) == set(p):
                    k0 = next(iter(p))
                    ratio = p[k0] / power[k0]
                    if not ratio.has_params() and all((p[k] - ratio * power[k]).is_zero() for k in p):
                        d = [0] * len(self.denominators)
                        d[t] = n
                        return {(0, tuple(d), z[2]): RATIO_ONE / ratio}
                power = _pmul(power, qp)
        raise EvalError("division is only allowed by constants or declared denominators")

    def _classical(self, e, what: str) -> dict:
        p = self.evaluate(e)
        if any(k[0] for k in p):
            raise EvalError(f"{what} must not contain hbar")
        return {(k[1], k[2]): v for k, v in p.items()}

    # -- views used by the solver -------------------------------------------
    @cached_property
    def _gt(self) -> GeneratorTable:
        dens = []
        for name, q in self.denominators:
            p = self._classical(q, f"denominator {name}")
            if any(any(k[0]) for k in p):
                raise EvalError(f"denominator {name} may not contain denominators")
            dens.append((name, {k[1]: v for k, v in p.items()}))
        return GeneratorTable(self.generators, dens)

    def generator_table(self) -> GeneratorTable:
        return self._gt

    def classical_field(self) -> dict[str, dict]:
        return {g: self._classical(e, f"evolution of {g}") for g, e in self.evolution}

    def integral_polys(self) -> dict[str, dict]:
        return {n: self._classical(e, f"integral {n}") for n, e in self.integrals}

    def integral(self, name: str) -> NCElement:
        from .solver import ordered_element

        return ordered_element(dict(self.integral_polys())[name], self._gt)

    def element(self, text: str) -> NCElement:
        """Order an expression given as text (``hbar`` and ``i`` allowed)."""
        e = parse_expr(text, _Known(self.known_symbols()), allow_quantum=True)
        from .solver import ordered_element

        return ordered_element(self.evaluate(e), self._gt)

    def known_symbols(self) -> dict[str, str]:
        out = {c: "constant" for c in self.constants}
        out.update({p: "parameter" for p in self.parameters})
        out.update({g: "generator" for g in self.generators})
        out.update({d: "denominator" for d, _ in self.denominators})
        out.update({n: "label" for n, *_ in self.label_defs})
        return out

    @cached_property
    def labels(self) -> tuple[LabelSpec, ...]:
        out = []
        for name, left, right, e in self.label_defs:
            p = self.evaluate(e)
            if len(p) != 1:
                raise EvalError(f"label {name} must name a single term")
            (key, c), = p.items()
            if c.has_params():
                raise EvalError(f"label {name}: scale must not contain free parameters")
            out.append(LabelSpec(name, left, right, e, key[0], key[1], key[2], c))
        return tuple(out)

    def config(self, **overrides):
        from .solver import AnsatzConfig

        opts = {"den_degree": 1 if self.denominators else 0}
        for k, v in self.options:
            opts[k] = bool(v) if k == "hermiticity" else v
        opts.update({k: v for k, v in overrides.items() if v is not None})
        return AnsatzConfig(**opts)


# ---------------------------------------------------------------------------
# parsing


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def parse_system(text: str) -> SystemSpec:
    """Parse a system description; errors carry line and column."""
    if not isinstance(text, str):
        raise ParseError("input must be text", 1, 1)
    name = None
    constants: list[str] = []
    parameters: list[str] = []
    generators: list[str] = []
    denominators: list[tuple[str, tuple]] = []
    evolution: dict[str, tuple] = {}
    integrals: list[tuple[str, tuple]] = []
    labels: list[tuple] = []
    options: dict[str, int] = {}
    declared: dict[str, str] = {}
    section = None
    last = (1, 1)

    def declare_name(tok: _Tok, kind: str):
        if tok.kind != "id":
            raise ParseError(f"expected a name, found {tok.text or 'end of line'!r}", tok.line, tok.col)
        if tok.text in RESERVED:
            raise ParseError(f"{tok.text!r} is a reserved word", tok.line, tok.col)
        if tok.text in declared:
            raise ParseError(f"{tok.text!r} is already declared as a {declared[tok.text]}", tok.line, tok.col)
        if kind in ("constant", "parameter") and tok.text in _kinds_taken(tok.text, kind):
            raise ParseError(f"{tok.text!r} is already in use with another kind", tok.line, tok.col)
        declared[tok.text] = kind

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        toks = _tokenize(line, lineno)
        last = (lineno, len(line) + 1)
        head = toks[0]
        if head.kind == "id" and head.text in SECTIONS and head.col == _indent(line) + 1 and (
            head.text != "system" or name is None
        ) and not (len(toks) > 1 and toks[1].text in ("'", "=")):
            section = head.text
            rest = toks[1:-1]
            if section == "system":
                if len(rest) != 1 or rest[0].kind != "id":
                    t = rest[1] if len(rest) > 1 else toks[-1]
                    raise ParseError("expected: system NAME", t.line, t.col)
                name = rest[0].text
            elif section in ("constants", "parameters", "generators"):
                kind = {"constants": "constant", "parameters": "parameter", "generators": "generator"}[section]
                for t in rest:
                    declare_name(t, kind)
                    {"constant": constants, "parameter": parameters, "generator": generators}[kind].append(t.text)
            elif section == "denominator":
                if len(rest) < 3 or rest[1].text != "=":
                    t = rest[1] if len(rest) > 1 else toks[-1]
                    raise ParseError("expected: denominator NAME = 1/(expr)", t.line, t.col)
                col = rest[2].col
                e = parse_expr(line[col - 1:], dict(declared), line=lineno, col=col)
                if not (e[0] == "div" and e[1] == ("num", 1)):
                    raise ParseError("denominator must have the form 1/(expr)", lineno, col)
                q = e[2]
                if _mentions(q, {d for d, _ in denominators}):
                    raise ParseError("denominators may not be nested", lineno, col)
                if not _mentions(q, set(generators)):
                    raise ParseError("denominator must depend on a generator", lineno, col)
                declare_name(rest[0], "denominator")
                denominators.append((rest[0].text, q))
            elif rest:
                raise ParseError(f"unexpected {rest[0].text!r} after {section!r}", rest[0].line, rest[0].col)
            continue
        if section is None or section in ("system", "constants", "parameters", "generators", "denominator"):
            if section in ("constants", "parameters", "generators") and all(t.kind in ("id", "end") for t in toks):
                kind = {"constants": "constant", "parameters": "parameter", "generators": "generator"}[section]
                for t in toks[:-1]:
                    declare_name(t, kind)
                    {"constant": constants, "parameter": parameters, "generator": generators}[kind].append(t.text)
                continue
            raise ParseError(f"unexpected {head.text!r}", head.line, head.col)
        if section == "evolution":
            if head.kind != "id" or toks[1].text != "'" or toks[2].text != "=":
                raise ParseError("expected: NAME' = expr", head.line, head.col)
            if head.text not in generators:
                raise ParseError(f"{head.text!r} is not a generator", head.line, head.col)
            if head.text in evolution:
                raise ParseError(f"duplicate equation for {head.text!r}", head.line, head.col)
            if toks[3].kind == "end":
                raise ParseError("missing right-hand side", toks[3].line, toks[3].col)
            evolution[head.text] = parse_expr(line[toks[3].col - 1:], dict(declared), line=lineno, col=toks[3].col)
        elif section == "integrals":
            if head.kind != "id" or toks[1].text != "=":
                raise ParseError("expected: NAME = expr", head.line, head.col)
            if head.text in declared or head.text in RESERVED or head.text in {n for n, _ in integrals}:
                raise ParseError(f"integral name {head.text!r} is already in use", head.line, head.col)
            if toks[2].kind == "end":
                raise ParseError("missing right-hand side", toks[2].line, toks[2].col)
            integrals.append((head.text, parse_expr(line[toks[2].col - 1:], dict(declared), line=lineno, col=toks[2].col)))
        elif section == "labels":
            if head.kind != "id" or toks[1].text != "=" or toks[2].text != "[":
                raise ParseError("expected: NAME = [A, B] @ term", head.line, head.col)
            if len(toks) < 9:
                raise ParseError("expected: NAME = [A, B] @ term", toks[-1].line, toks[-1].col)
            a, comma, b, close, at = toks[3:8]
            for t, want in ((comma, ","), (close, "]"), (at, "@")):
                if t.text != want:
                    raise ParseError(f"expected {want!r}, found {t.text or 'end of line'!r}", t.line, t.col)
            for t in (a, b):
                if t.text not in generators:
                    raise ParseError(f"{t.text!r} is not a generator", t.line, t.col)
            if a.text == b.text:
                raise ParseError("a label needs two different generators", b.line, b.col)
            tok_rest = toks[8]
            if tok_rest.kind == "end":
                raise ParseError("missing term after '@'", tok_rest.line, tok_rest.col)
            e = parse_expr(line[tok_rest.col - 1:], dict(declared), line=lineno, col=tok_rest.col,
                           allow_quantum=True)
            declare_name(head, "label")
            labels.append((head.text, a.text, b.text, e))
        elif section == "options":
            if head.kind != "id" or toks[1].text != "=":
                raise ParseError("expected: NAME = value", head.line, head.col)
            if head.text not in OPTION_KEYS:
                raise ParseError(f"unknown option {head.text!r}", head.line, head.col)
            v = toks[2]
            if v.kind == "id" and v.text in ("true", "false") and head.text == "hermiticity":
                val = int(v.text == "true")
            elif v.kind == "num":
                val = int(v.text)
            else:
                raise ParseError("option values are natural numbers (or true/false)", v.line, v.col)
            if toks[3].kind != "end":
                raise ParseError(f"unexpected {toks[3].text!r}", toks[3].line, toks[3].col)
            if head.text == "K" and val < 1:
                raise ParseError("K must be at least 1", v.line, v.col)
            options[head.text] = val
    if name is None:
        raise ParseError("missing 'system NAME' line", 1, 1)
    if not generators:
        raise ParseError("no generators declared", *last)
    missing = [g for g in generators if g not in evolution]
    if missing:
        raise ParseError(f"no evolution equation for {missing[0]!r}", *last)
    spec_kwargs = dict(
        name=name,
        constants=tuple(constants),
        generators=tuple(generators),
        evolution=tuple((g, evolution[g]) for g in generators),
        parameters=tuple(parameters),
        denominators=tuple(denominators),
        integrals=tuple(integrals),
        label_defs=tuple(labels),
        options=tuple(sorted(options.items(), key=lambda kv: OPTION_KEYS.index(kv[0]))),
    )
    try:
        spec = SystemSpec(**spec_kwargs)
        spec.generator_table()
        for g, e in spec.evolution:
            spec._classical(e, f"evolution of {g}")
        spec.integral_polys()
        spec.labels
    except (EvalError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), *last) from exc
    return spec


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip())


class _Known(dict):
    """Declared system symbols plus anything already in the symbol registry."""

    def __contains__(self, name) -> bool:
        return dict.__contains__(self, name) or is_declared(name)


def _kinds_taken(name: str, kind: str) -> set[str]:
    want = CONSTANT if kind == "constant" else PARAM
    if is_declared(name) and symbol_kind(name) != want:
        return {name}
    return set()


def _mentions(e, names: set[str]) -> bool:
    if e[0] == "sym":
        return e[1] in names
    if e[0] == "num":
        return False
    if e[0] in ("add", "mul"):
        return any(_mentions(a, names) for a in e[1])
    if e[0] == "div":
        return _mentions(e[1], names) or _mentions(e[2], names)
    return _mentions(e[1], names)


def format_system(spec: SystemSpec) -> str:
    """Pretty-print ``spec`` in the input language."""
    lines = [f"system {spec.name}"]
    if spec.constants:
        lines.append("constants " + " ".join(spec.constants))
    if spec.parameters:
        lines.append("parameters " + " ".join(spec.parameters))
    lines.append("generators " + " ".join(spec.generators))
    for d, q in spec.denominators:
        lines.append(f"denominator {d} = 1/({format_expr(q)})")
    lines.append("evolution")
    lines += [f"  {g}' = {format_expr(e)}" for g, e in spec.evolution]
    if spec.integrals:
        lines.append("integrals")
        lines += [f"  {n} = {format_expr(e)}" for n, e in spec.integrals]
    if spec.label_defs:
        lines.append("labels")
        lines += [f"  {n} = [{a}, {b}] @ {format_expr(e)}" for n, a, b, e in spec.label_defs]
    if spec.options:
        lines.append("options")
        for k, v in spec.options:
            lines.append(f"  {k} = {('true' if v else 'false') if k == 'hermiticity' else v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# built-in catalog

EXAMPLES: dict[str, str] = {
    "magnetic_particle": """\
system magnetic_particle
constants q B c m
generators v_x v_y
evolution
  v_x' = q*B/(m*c)*v_y
  v_y' = -q*B/(m*c)*v_x
integrals
  H = m*(v_x^2 + v_y^2)/2
labels
  k = [v_y, v_x] @ i*hbar
options
  K = 1
""",
    "euler_top": """\
system euler_top
constants a1 a2 a3
parameters b1 b2 b3
generators L1 L2 L3
evolution
  L1' = a1*L2*L3
  L2' = a2*L1*L3
  L3' = a3*L1*L2
integrals
  H = (b1*L1^2 + b2*L2^2 + b3*L3^2)/2
labels
  f1 = [L3, L2] @ -i*hbar*L1
  f2 = [L3, L1] @ i*hbar*L2
  f3 = [L2, L1] @ -i*hbar*L3
options
  K = 1
  D_table = 1
  D_deriv = 2
  D_integral = 2
""",
    "pais_uhlenbeck": """\
system pais_uhlenbeck
constants w1 w2
generators x1 x2 x3 x4
evolution
  x1' = x2
  x2' = x3
  x3' = x4
  x4' = -(w1^2 + w2^2)*x3 - w1^2*w2^2*x1
integrals
  H1 = -w1^2*w2^2*x2^2/2 + (w1^2 + w2^2)*x3^2/2 + x4^2/2 + w1^2*w2^2*x1*x3
  H2 = w1^2*w2^2*x1^2/2 + (w1^2 + w2^2)*x2^2/2 - x3^2/2 + x2*x4
labels
  f = [x1, x2] @ i*hbar
  g = [x1, x4] @ i*hbar
options
  K = 1
""",
    "nonlinear_oscillator": """\
system nonlinear_oscillator
constants lam omega
generators x y
denominator d = 1/(1 + lam*x^2)
evolution
  x' = y
  y' = lam*x*y^2/(1 + lam*x^2) - omega^2*x/(1 + lam*x^2)
integrals
  H = (y^2 + omega^2*x^2)/(2*(1 + lam*x^2))
labels
  k = [y, x] @ -i*hbar
options
  K = 2
  D_table = 2
  D_deriv = 2
  D_integral = 2
  den_degree = 1
""",
    "canonical_oscillator": """\
system canonical_oscillator
constants omega
generators x p
evolution
  x' = p
  p' = -omega^2*x
integrals
  H = (p^2 + omega^2*x^2)/2
labels
  s = [x, p] @ i*hbar
options
  K = 1
""",
}


def load_example(name: str) -> SystemSpec:
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; available: {', '.join(sorted(EXAMPLES))}")
    return parse_system(EXAMPLES[name])


# ---------------------------------------------------------------------------
# results


def _element_terms(el: NCElement) -> list[dict]:
    out = []
    for (h, d, g), c in el.sorted_terms():
        out.append({"coefficient": coeff_string(c, h), "monomial": el.gt.monomial_str(d, g)})
    return out


def element_string(el: NCElement) -> str:
    """Single-line rendering that :func:`element_from_string` reads back."""
    if el.is_zero():
        return "0"
    parts = []
    for (h, d, g), c in el.sorted_terms():
        cs = coeff_string(c, h)
        mono = el.gt.monomial_str(d, g).replace(" ", "*")
        if not mono:
            parts.append(f"({cs})")
        else:
            parts.append(f"({cs})*{mono}")
    return " + ".join(parts)


def element_from_string(text: str, spec: SystemSpec) -> NCElement:
    """Read an ordered element; products are taken in the written order."""
    return spec.element(text)


def _pair_lhs(gt, i, j) -> str:
    return f"{gt.names[j]} {gt.names[i]}"


def _relation_rhs(gt, i, j, f: NCElement) -> str:
    base = f"{gt.names[i]} {gt.names[j]}"
    if f.is_zero():
        return base
    return (base + " + " + _inline(f)).replace("+ -", "- ")


def _inline(el: NCElement) -> str:
    out = []
    for (h, d, g), c in el.sorted_terms():
        cs = coeff_string(c, h)
        mono = el.gt.monomial_str(d, g)
        if mono and cs in ("1", "-1"):
            out.append(mono if cs == "1" else "-" + mono)
        else:
            out.append(f"{cs} {mono}".strip() if mono else cs)
    s = " + ".join(out)
    return s.replace("+ -", "- ")


def result_to_json(result) -> dict:
    gt = result.gt
    relations = []
    for i in range(gt.n):
        for j in range(i + 1, gt.n):
            f = result.table.entry(i, j)
            relations.append({
                "lhs": _pair_lhs(gt, i, j),
                "rhs": [{"coefficient": "1", "monomial": f"{gt.names[i]} {gt.names[j]}"}] + _element_terms(f),
                "value": element_string(f),
            })
    derivation = {
        n: {"terms": _element_terms(e), "value": element_string(e)}
        for n, e in result.derivation.images.items()
    }
    integrals = {}
    for n, e in result.integrals.items():
        fam = result.integral_families.get(n)
        integrals[n] = {
            "terms": _element_terms(e),
            "value": element_string(e),
            "constraints": fam.constraint_strings() if fam else [],
        }
    out = {
        "system": result.system.name,
        "hbar_order": result.K,
        "relations": relations,
        "derivation": derivation,
        "integrals": integrals,
        "free_params": list(result.free_params),
        "constraints": result.constraint_strings(),
        "assumptions": list(result.assumptions),
        "exact": bool(result.exact),
        "consistency_report": {
            "consistent": result.consistency_report.consistent,
            "summary": result.consistency_report.summary(),
        },
    }
    if result.hamiltonian is not None:
        out["hamiltonian"] = element_string(result.hamiltonian)
    return out


def render_result(result, fmt: str = "text") -> bytes:
    if fmt == "json":
        return (json.dumps(result_to_json(result), indent=2) + "\n").encode()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    gt = result.gt
    lines = [f"system {result.system.name} (hbar order {result.K})", "", "relations:"]
    for i in range(gt.n):
        for j in range(i + 1, gt.n):
            lines.append(f"  {_pair_lhs(gt, i, j)} = {_relation_rhs(gt, i, j, result.table.entry(i, j))}")
    lines += ["", "evolution:"]
    for n, e in result.derivation.images.items():
        lines.append(f"  {n}' = {_inline(e) if not e.is_zero() else '0'}")
    if result.integrals:
        lines += ["", "integrals:"]
        for n, e in result.integrals.items():
            lines.append(f"  {n} = {_inline(e) if not e.is_zero() else '0'}")
            fam = result.integral_families.get(n)
            for c in (fam.constraint_strings() if fam else []):
                lines.append(f"    conserved when {c}")
    if result.hamiltonian is not None:
        lines += ["", f"hamiltonian: {_inline(result.hamiltonian)}"]
    lines += ["", "free parameters: " + (", ".join(result.free_params) or "none")]
    for c in result.constraint_strings():
        lines.append(f"  constraint: {c}")
    for a in result.assumptions:
        lines.append(f"  assuming: {a}")
    lines.append(f"exact: {'yes' if result.exact else 'no'}")
    lines.append(f"table: {result.consistency_report.summary()}")
    return ("\n".join(lines) + "\n").encode()


def load_result_json(data: str | bytes | dict, spec: SystemSpec) -> dict:
    """Rebuild the canonical content of a JSON result over ``spec``.

    Returns ``{"table": {(a, b): NCElement}, "derivation": {...},
    "integrals": {...}, "free_params": [...], "constraints": [...],
    "exact": bool}``.
    """
    if not isinstance(data, dict):
        data = json.loads(data)
    for p in data["free_params"]:
        declare(p, PARAM)
    table = {}
    for rel in data["relations"]:
        j, i = rel["lhs"].split()
        table[(i, j)] = spec.element(rel["value"])
    return {
        "system": data["system"],
        "hbar_order": data["hbar_order"],
        "table": table,
        "derivation": {n: spec.element(v["value"]) for n, v in data["derivation"].items()},
        "integrals": {n: spec.element(v["value"]) for n, v in data["integrals"].items()},
        "free_params": list(data["free_params"]),
        "constraints": list(data["constraints"]),
        "exact": data["exact"],
    }
