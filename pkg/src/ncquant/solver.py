"""Order-by-order construction of quantum commutation tables and dynamics.

The unknown coefficients of the commutation table, of the derivation and of
integrals of motion are complex slots ``u_re + i*u_im`` with real unknowns.
Every condition is split into real and imaginary parts, collected at a fixed
power of hbar and solved exactly.  Orders are processed in turn; at order
``k`` the equations are linear in the order-``k`` unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from math import gcd
from typing import Iterable, Mapping, Sequence

from . import coeffs as _c
from .coeffs import (
    PARAM,
    RATIO_I,
    RATIO_ZERO,
    FreeParameterDivision,
    ParamPoly,
    ParamRatio,
    declare,
    linear_form,
    solve_parametric_linear,
    symbol_kind,
)
from .dynamics import Derivation, inner_derivation
from .ncalg import CommutationTable, GeneratorTable, NCElement, OrderedMonomial

__all__ = [
    "AnsatzConfig",
    "Ansatz",
    "Slot",
    "QuantizationError",
    "InconsistentSystem",
    "AnsatzExhausted",
    "HeisenbergFailure",
    "IntegralFamily",
    "QuantizationResult",
    "TableReport",
    "build_ansatz",
    "consistency_defect",
    "solve_quantization",
    "solve_integral_corrections",
    "impose_heisenberg",
    "check_table_consistency",
    "ordered_element",
]

HALF = ParamRatio.const(_c.Scalar(_c.Fraction(1, 2)))


# ---------------------------------------------------------------------------
# errors


class QuantizationError(Exception):
    """Base class for structured solver failures."""

    def __init__(self, message: str, *, order: int | None = None, where: str | None = None):
        super().__init__(message)
        self.order = order
        self.where = where


class InconsistentSystem(QuantizationError):
    pass


class AnsatzExhausted(QuantizationError):
    pass


class HeisenbergFailure(QuantizationError):
    pass


# ---------------------------------------------------------------------------
# configuration and ansatz


@dataclass(frozen=True)
class AnsatzConfig:
    K: int = 1
    D_table: int = 0
    D_deriv: int = 0
    D_integral: int = 0
    den_degree: int = 0
    table_den_degree: int = 0
    hermiticity: bool = True
    heisenberg_target: str | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        for name in ("D_table", "D_deriv", "D_integral", "den_degree", "table_den_degree"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class Slot:
    """One complex unknown coefficient ``re + i*im``."""

    role: str  # "table", "derivation", "integral" or "hamiltonian"
    target: str  # "x,y" for a pair, otherwise a generator or integral name
    order: int
    monomial: OrderedMonomial
    re: str
    im: str

    @property
    def value(self) -> ParamRatio:
        return ParamRatio.symbol(self.re) + RATIO_I * ParamRatio.symbol(self.im)


@dataclass
class Ansatz:
    table: CommutationTable
    derivation: Derivation
    slots: list[Slot]

    def count(self, role: str) -> int:
        return sum(1 for s in self.slots if s.role == role)

    def unknowns(self, role: str | None = None) -> list[str]:
        out = []
        for s in self.slots:
            if role is None or s.role == role:
                out += [s.re, s.im]
        return out


def _slot(role, target, order, mono, tag) -> Slot:
    base = f"_{tag}_{order}_{'.'.join(map(str, mono.den_exps + mono.gen_exps))}"
    re, im = base + "_re", base + "_im"
    declare(re, PARAM)
    declare(im, PARAM)
    return Slot(role, target, order, mono, re, im)


def _pivot_key(s: Slot):
    # newest order first; low-degree slots are solved for, high-degree ones stay free
    return (-s.order, sum(s.monomial.den_exps) + sum(s.monomial.gen_exps))


def _correction_series(gt, role, target, tag, K, degree, den_degree, slots, start=1):
    out = {}
    for k in range(start, K + 1):
        for mono in gt.monomials_up_to(degree, den_degree):
            s = _slot(role, target, k, mono, tag)
            slots.append(s)
            out[(k,) + tuple(mono)] = s.value
    return NCElement(gt, out)


def ordered_element(poly: Mapping[tuple, ParamRatio], gt: GeneratorTable) -> NCElement:
    """Order a commutative polynomial ``{(dens, gens): c}`` (or ``{(h, dens, gens): c}``)."""
    terms = {}
    for key, c in poly.items():
        if len(key) == 2:
            key = (0,) + tuple(key)
        terms[(key[0], tuple(key[1]), tuple(key[2]))] = c
    el = NCElement(gt, terms)
    return CommutationTable(gt).localize_reduce(el, max([k[0] for k in terms], default=0))


def build_ansatz(system, config: AnsatzConfig) -> Ansatz:
    """Table and derivation with one unknown per coefficient slot.

    The hbar^0 part of the derivation is the ordered classical field.
    """
    gt = system.generator_table()
    slots: list[Slot] = []
    entries = {}
    for i in range(gt.n):
        for j in range(i + 1, gt.n):
            if i < gt.prefix and j < gt.prefix:
                continue
            tag = f"F{i}.{j}"
            entries[(i, j)] = _correction_series(
                gt, "table", f"{gt.names[i]},{gt.names[j]}", tag, config.K,
                config.D_table, config.table_den_degree, slots,
            )
    table = CommutationTable(gt, entries)
    field_ = system.classical_field()
    images = {}
    for j, name in enumerate(gt.names):
        base = ordered_element(field_[name], gt)
        corr = _correction_series(
            gt, "derivation", name, f"G{j}", config.K, config.D_deriv, config.den_degree, slots
        )
        images[name] = base + corr
    return Ansatz(table, Derivation(table, images), slots)


def consistency_defect(i, j, table: CommutationTable, derivation: Derivation, K: int) -> NCElement:
    """``X(x_j x_i - x_i x_j - F_ij)`` expanded by Leibniz and normal-ordered."""
    gt = table.gt
    i = gt.index[i] if isinstance(i, str) else i
    j = gt.index[j] if isinstance(j, str) else j
    if not i < j:
        raise ValueError("consistency_defect expects i < j")
    xi, xj = gt.gen(gt.names[i]), gt.gen(gt.names[j])
    Xi, Xj = derivation.image(gt.names[i]), derivation.image(gt.names[j])
    out = table.commutator(Xj, xi, K) + table.commutator(xj, Xi, K)
    return out - derivation.apply(table.entry(i, j), K)


# ---------------------------------------------------------------------------
# equation handling


def _split(c: ParamRatio) -> list[ParamRatio]:
    """Real and imaginary parts; all symbols are real."""
    cc = c.conjugate()
    re = (c + cc) * HALF
    im = (c - cc) * (RATIO_I * -HALF)
    return [e for e in (re, im) if not e.is_zero()]


def _equations(el: NCElement, h: int, where: str) -> list[tuple[ParamRatio, str]]:
    out = []
    for (hh, _, _), c in el.sorted_terms():
        if hh == h:
            out += [(e, where) for e in _split(c)]
    return out


def _is_param(name: str) -> bool:
    return symbol_kind(name) == PARAM


def _content_normalize(num: ParamPoly) -> ParamPoly:
    """Scale a polynomial to coprime integer coefficients with a positive lead."""
    den = 1
    nums = []
    for c in num.terms.values():
        for q in (c.re, c.im):
            if q:
                den = den * q.denominator // gcd(den, q.denominator)
                nums.append(q.numerator)
    if not nums:
        return num
    g = 0
    for q in nums:
        g = gcd(g, abs(q))
    scale = _c.Fraction(den, g)
    p = num.scale(_c.Scalar(scale))
    _, lc = p.leading()
    if lc.re == 0:
        p = p.scale(_c.Scalar(0, -1) if lc.im > 0 else _c.Scalar(0, 1))
    elif lc.re < 0:
        p = p.scale(_c.Scalar(-1))
    # drop constant-only monomial factors common to every term
    common = None
    for m in p.terms:
        md = {i: e for i, e in m if not _is_param(_c._names[i])}
        common = md if common is None else {i: min(e, md[i]) for i, e in common.items() if i in md}
    if common:
        def strip(m):
            return tuple((i, e - common.get(i, 0)) for i, e in m if e - common.get(i, 0))
        p = ParamPoly({strip(m): c for m, c in p.terms.items()})
    return p


def normalize_relation(e: ParamRatio) -> ParamRatio:
    """A canonical scalar multiple of ``e`` for display as ``e = 0``."""
    if e.is_zero():
        return e
    return ParamRatio(_content_normalize(e.num))


def relation_string(e: ParamRatio) -> str:
    """Render ``e = 0`` with a pinned symbol on the left when possible."""
    num = normalize_relation(e).num
    lin = [(m, c) for m, c in num.sorted_terms() if len(m) == 1 and m[0][1] == 1
           and _is_param(_c._names[m[0][0]])]
    for m, c in lin:
        name = _c._names[m[0][0]]
        rest = ParamPoly({mm: cc for mm, cc in num.terms.items() if mm != m})
        if name not in rest.symbols() and not rest.has_params():
            val = ParamRatio(-rest) / ParamRatio.const(c)
            return f"{name} = {val}"
    return f"{num} = 0"


class _Reducer:
    """Zero tests and simplification modulo linear relations and polynomial constraints."""

    def __init__(self, relations: Sequence[ParamRatio] = (), constraints: Sequence[ParamRatio] = ()):
        self.relations = [r for r in relations if not r.is_zero()]
        self.constraints = [r for r in constraints if not r.is_zero()]
        self.subst: dict[str, ParamRatio] = {}
        if self.relations:
            syms = sorted(set().union(*(r.symbols() for r in self.relations)), key=_c.symbol_key)
            params = [s for s in syms if _is_param(s)]
            sol = solve_parametric_linear(self.relations, params)
            self.subst = sol.solution()
        self._groebner: dict | None = None

    def reduce_linear(self, c: ParamRatio) -> ParamRatio:
        return c.substitute(self.subst) if self.subst else c

    def _basis(self, extra: frozenset[str]):
        import sympy

        polys = [r.num for r in self.relations + self.constraints]
        names = set().union(*(p.symbols() for p in polys)) | extra
        key = frozenset(names)
        hit = self._groebner.get(key) if self._groebner else None
        if hit is not None:
            return hit
        names = sorted(names, key=_c.symbol_key)
        params = [n for n in names if _is_param(n)]
        consts = [n for n in names if not _is_param(n)]
        gens = {n: sympy.Symbol(n) for n in names}
        exprs = [_c._to_sympy(p, gens) for p in polys]
        dom = sympy.QQ_I.frac_field(*[gens[n] for n in consts]) if consts else sympy.QQ_I
        G = sympy.groebner(exprs, *[gens[n] for n in params], domain=dom, order="grevlex")
        self._groebner = self._groebner or {}
        self._groebner[key] = (G, gens, params)
        return self._groebner[key]

    def reduce(self, c: ParamRatio) -> ParamRatio:
        if c.is_zero():
            return c
        r = self.reduce_linear(c)
        if r.is_zero() or not self.constraints:
            return r
        import sympy

        if not any(_is_param(n) for n in c.num.symbols()):
            return c
        G, gens, params = self._basis(frozenset(c.symbols()))
        _, rem = G.reduce(_c._to_sympy(c.num, gens))
        num, den = sympy.fraction(sympy.together(sympy.expand(rem)))
        names = sorted(gens, key=_c.symbol_key)
        syms = [gens[n] for n in names]
        pn = _c._from_sympy_poly(sympy.Poly(num, *syms, domain="QQ_I"), names)
        pd = _c._from_sympy_poly(sympy.Poly(den, *syms, domain="QQ_I"), names)
        return ParamRatio(pn, pd) / ParamRatio(c.den)

    def is_zero(self, c: ParamRatio) -> bool:
        return self.reduce(c).is_zero()

    def element_is_zero(self, el: NCElement) -> bool:
        return all(self.is_zero(c) for c in el.terms.values())

    def tidy(self, c: ParamRatio) -> ParamRatio:
        """Rewrite ``c`` with the fewest relation symbols it can be expressed in."""
        if c.is_zero():
            return c
        red = self.reduce(c)
        if red.is_zero():
            return red
        if not self.relations:
            return c
        return _minimal_support(c, self.relations) or c


def _minimal_support(c: ParamRatio, relations: Sequence[ParamRatio]) -> ParamRatio | None:
    syms = sorted(set().union(*(r.symbols() for r in relations)) & c.symbols()
                  | set().union(*(r.symbols() for r in relations)), key=_c.symbol_key)
    syms = [s for s in syms if _is_param(s)]
    try:
        w = linear_form(c, syms)
        rel_forms = [linear_form(r, syms) for r in relations]
    except (ValueError, FreeParameterDivision):
        return None
    if any(v.has_params() for k, v in w.items() if k is not None):
        return None
    if any(v.has_params() for f in rel_forms for k, v in f.items() if k is not None):
        return None
    mus = []
    for k in range(len(relations)):
        nm = f"_mu{k}"
        declare(nm, PARAM)
        mus.append(nm)
    current = {s for s in syms if s in w}
    for size in range(len(current) + 1):
        for keep in combinations(syms, size):
            eqs = []
            for s in syms:
                if s in keep:
                    continue
                e = w.get(s, RATIO_ZERO)
                for mu, f in zip(mus, rel_forms):
                    if s in f:
                        e = e + ParamRatio.symbol(mu) * f[s]
                if not e.is_zero():
                    eqs.append(e)
            if not eqs:
                return c
            sol = solve_parametric_linear(eqs, mus)
            if not sol.consistent or sol.residuals:
                continue
            vals = sol.solution({m: RATIO_ZERO for m in mus})
            out = c
            for mu, r in zip(mus, relations):
                out = out + vals.get(mu, RATIO_ZERO) * r
            return out
    return None


class _Engine:
    """Propagates solved values through a growing set of equations."""

    def __init__(self, priority: Sequence[str], protected: Sequence[str]):
        self.priority = {u: k for k, u in enumerate(priority)}
        self.protected = list(dict.fromkeys(protected))
        self.values: dict[str, ParamRatio] = {}
        self.pending: list[tuple[ParamRatio, str]] = []
        self.assumptions: list[str] = []
        self.pinned: dict[str, ParamRatio] = {}
        self.linear: list[tuple[ParamRatio, str]] = []
        self.nonlinear: list[tuple[ParamRatio, str]] = []
        self.unresolved: list[tuple[ParamRatio, str]] = []

    def add(self, eqs: Iterable[tuple[ParamRatio, str]]) -> None:
        self.pending.extend((e, w) for e, w in eqs if not e.is_zero())

    def _active(self, e: ParamRatio) -> list[str]:
        act = [u for u in e.symbols() if u in self.priority and u not in self.values]
        return sorted(act, key=self.priority.get)

    def set_values(self, sol: Mapping[str, ParamRatio]) -> None:
        if not sol:
            return
        self.values = {k: v.substitute(sol) for k, v in self.values.items()}
        self.values.update(sol)

    def _fail(self, eqs, order, message):
        where = eqs[0][1] if eqs else None
        raise InconsistentSystem(
            f"{message}" + (f" ({where})" if where else ""), order=order, where=where
        )

    def _culprit(self, eqs, unknowns):
        acc = []
        for e in eqs:
            acc.append(e)
            sol = solve_parametric_linear([x for x, _ in acc], unknowns)
            if not sol.consistent:
                return [e]
        return eqs[:1]

    def propagate(self, order: int | None = None) -> None:
        while True:
            pend = []
            for e, w in self.pending:
                e = e.substitute(self.values)
                if not e.is_zero():
                    pend.append((e, w))
            self.pending = pend
            if self._solve_linear(order):
                continue
            if self._partial_pivot():
                continue
            if self._protected_phase(order):
                continue
            break

    def _solve_linear(self, order) -> bool:
        lin, act_all = [], set()
        for e, w in self.pending:
            act = self._active(e)
            if not act:
                continue
            try:
                form = linear_form(e, act)
            except ValueError:
                continue
            if any(form[u].has_params() for u in act if u in form):
                continue
            lin.append((e, w))
            act_all.update(act)
        if not lin:
            return False
        unknowns = sorted(act_all, key=self.priority.get)
        sol = solve_parametric_linear([e for e, _ in lin], unknowns)
        if not sol.consistent:
            self._fail(self._culprit(lin, unknowns), order, "inconsistent conditions")
        self.assumptions.extend(a for a in sol.assumptions if a not in self.assumptions)
        new = sol.solution()
        if not new:
            return False
        self.set_values(new)
        return True

    def _partial_pivot(self) -> bool:
        for e, _ in self.pending:
            for u in self._active(e):
                try:
                    form = linear_form(e, [u])
                except ValueError:
                    continue
                c = form.get(u)
                if c is None or c.has_params():
                    continue
                if not c.is_scalar():
                    a = _c.nonzero_note(c)
                    if a not in self.assumptions:
                        self.assumptions.append(a)
                self.set_values({u: -form.get(None, RATIO_ZERO) / c})
                return True
        return False

    def _protected_phase(self, order) -> bool:
        lin, nonlin, unresolved = [], [], []
        for e, w in self.pending:
            if self._active(e):
                unresolved.append((e, w))
                continue
            syms = [s for s in e.symbols() if _is_param(s)]
            if not syms:
                self._fail([(e, w)], order, f"contradiction {e} = 0")
            try:
                form = linear_form(e, syms)
                ok = all(not form[s].has_params() for s in syms if s in form)
            except ValueError:
                ok = False
            (lin if ok else nonlin).append((e, w))
        unknowns = list(self.protected)
        unknowns += sorted(
            {s for e, _ in lin for s in e.symbols() if _is_param(s)} - set(unknowns),
            key=_c.symbol_key,
        )
        pins = {}
        if lin:
            sol = solve_parametric_linear([e for e, _ in lin], unknowns)
            if not sol.consistent:
                self._fail(self._culprit(lin, unknowns), order, "inconsistent conditions")
            for u, row in sol.pivots.items():
                if set(row) <= {None}:
                    pins[u] = -row.get(None, RATIO_ZERO)
        if pins:
            self.pinned.update(pins)
            self.set_values(pins)
            return True
        red = _Reducer([e for e, _ in lin])
        self.linear = lin
        self.nonlinear = [(e, w) for e, w in nonlin if not red.is_zero(e)]
        self.unresolved = unresolved
        return False

    def constraints(self, given: Sequence[ParamRatio] = ()) -> tuple[list[ParamRatio], list[ParamRatio]]:
        """Independent linear relations and distinct nonlinear constraints beyond ``given``."""
        rel: list[ParamRatio] = []
        basis = [g for g in given if not g.is_zero()]
        for e, _ in self.linear:
            red = _Reducer(basis)
            if red.is_zero(e):
                continue
            basis.append(e)
            rel.append(normalize_relation(e))
        return rel, _new_constraints(basis, list(given), [e for e, _ in self.nonlinear + self.unresolved])


def _new_constraints(relations, given, candidates) -> list[ParamRatio]:
    """Candidates not implied by ``relations`` and ``given`` (or by earlier candidates)."""
    out: list[ParamRatio] = []
    for e in candidates:
        if _Reducer(relations, list(given) + out).reduce(e).is_zero():
            continue
        out.append(normalize_relation(e))
    return out


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class TableReport:
    consistent: bool
    checked: int
    violations: tuple[tuple[tuple[str, str, str], NCElement], ...]
    cap: int

    def summary(self) -> str:
        if self.consistent:
            return f"consistent ({self.checked} triples checked to hbar^{self.cap})"
        (a, b, c), r = self.violations[0]
        return f"inconsistent: ({a} {b}) {c} - {a} ({b} {c}) = {r}"


@dataclass(frozen=True)
class IntegralFamily:
    name: str
    element: NCElement
    general: NCElement
    free: tuple[str, ...]
    relations: tuple[ParamRatio, ...]
    constraints: tuple[ParamRatio, ...]
    pinned: tuple[tuple[str, ParamRatio], ...] = ()

    def constraint_strings(self) -> list[str]:
        return [relation_string(r) for r in self.relations + self.constraints]

    def match(self, target: NCElement) -> dict[str, ParamRatio] | None:
        """Values of the free parameters that turn ``general`` into ``target``, or None."""
        eqs = []
        for c in (self.general - target).terms.values():
            eqs += [(c + c.conjugate()) * HALF, (c - c.conjugate()) * (RATIO_I * -HALF)]
        sol = solve_parametric_linear([e for e in eqs if not e.is_zero()], list(self.free))
        if not sol.consistent or sol.residuals:
            return None
        values = {u: RATIO_ZERO for u in self.free}
        values.update(sol.solution({}))
        return values


@dataclass(frozen=True)
class QuantizationResult:
    system: object
    config: AnsatzConfig
    table: CommutationTable
    derivation: Derivation
    integrals: dict[str, NCElement]
    integral_families: dict[str, IntegralFamily]
    free_params: tuple[str, ...]
    relations: tuple[ParamRatio, ...]
    constraints: tuple[ParamRatio, ...]
    assumptions: tuple[str, ...]
    exact: bool
    consistency_report: TableReport
    defaulted: tuple[str, ...] = ()
    pinned: tuple[tuple[str, ParamRatio], ...] = ()
    hamiltonian: NCElement | None = None

    @property
    def gt(self) -> GeneratorTable:
        return self.table.gt

    @property
    def K(self) -> int:
        return self.config.K

    def reducer(self) -> _Reducer:
        return _Reducer(self.relations, self.constraints)

    def constraint_strings(self) -> list[str]:
        return [relation_string(r) for r in self.relations + self.constraints]

    def is_zero(self, el: NCElement) -> bool:
        """Zero test modulo the family's constraints."""
        return self.reducer().element_is_zero(el)

    def defects(self, K: int | None = None) -> dict[tuple[str, str], NCElement]:
        K = self.K if K is None else K
        gt = self.gt
        out = {}
        for i in range(gt.n):
            for j in range(i + 1, gt.n):
                out[(gt.names[i], gt.names[j])] = consistency_defect(
                    i, j, self.table, self.derivation, K
                )
        return out

    def specialize(self, values: Mapping[str, object]) -> "QuantizationResult":
        """Substitute values for free parameters (or constants)."""
        vals = {k: _c._ratio(v) if not isinstance(v, ParamRatio) else v for k, v in values.items()}
        try:
            return self._specialize(vals)
        except ZeroDivisionError:
            raise InconsistentSystem(
                "specialization makes a solved denominator vanish; the solution assumes "
                + ", ".join(self.assumptions)
            ) from None

    def _specialize(self, vals: dict[str, ParamRatio]) -> "QuantizationResult":
        table = self.table.substitute(vals)
        deriv = Derivation(table, {n: e.substitute(vals) for n, e in self.derivation.images.items()})
        ints = {n: e.substitute(vals) for n, e in self.integrals.items()}
        fams = {
            n: replace(
                f,
                element=f.element.substitute(vals),
                general=f.general.substitute(vals),
                relations=tuple(r.substitute(vals) for r in f.relations if not r.substitute(vals).is_zero()),
                constraints=tuple(r.substitute(vals) for r in f.constraints if not r.substitute(vals).is_zero()),
            )
            for n, f in self.integral_families.items()
        }
        rel = tuple(r.substitute(vals) for r in self.relations)
        con = tuple(r.substitute(vals) for r in self.constraints)
        for r in rel + con:
            if not r.is_zero() and not r.symbols() & {s for s in r.symbols() if _is_param(s)}:
                raise InconsistentSystem(f"specialization violates constraint {r} = 0")
        return replace(
            self,
            table=table,
            derivation=deriv,
            integrals=ints,
            integral_families=fams,
            free_params=tuple(p for p in self.free_params if p not in vals),
            relations=tuple(r for r in rel if not r.is_zero()),
            constraints=tuple(r for r in con if not r.is_zero()),
            hamiltonian=None if self.hamiltonian is None else self.hamiltonian.substitute(vals),
        )


# ---------------------------------------------------------------------------
# table consistency


def check_table_consistency(table: CommutationTable, K: int, max_degree: int = 1) -> TableReport:
    """Compare ``(a b) c`` with ``a (b c)`` for generator triples ``a > b > c``.

    With ``max_degree > 1`` triples of ordered monomials up to that degree are
    compared as well.
    """
    gt = table.gt
    violations = []
    checked = 0
    if max_degree <= 1:
        factors = [gt.gen(n) for n in gt.names]
        triples = [
            (factors[l], factors[j], factors[i], (gt.names[l], gt.names[j], gt.names[i]))
            for i in range(gt.n) for j in range(i + 1, gt.n) for l in range(j + 1, gt.n)
        ]
    else:
        monos = [m for m in gt.monomials_up_to(max_degree) if sum(m.gen_exps) > 0]
        els = [(gt.monomial(m.den_exps, m.gen_exps), gt.monomial_str(*m)) for m in monos]
        triples = [(a, b, c, (na, nb, nc)) for a, na in els for b, nb in els for c, nc in els]
    for a, b, c, names in triples:
        left = table.mul(table.mul(a, b, K), c, K)
        right = table.mul(a, table.mul(b, c, K), K)
        checked += 1
        r = left - right
        if not r.is_zero():
            violations.append((names, r))
    return TableReport(not violations, checked, tuple(violations), K)


# ---------------------------------------------------------------------------
# labels


def _label_value(label, table: CommutationTable, K: int) -> ParamRatio:
    gt = table.gt
    comm = table.commutator(gt.gen(label.left), gt.gen(label.right), K)
    c = comm.terms.get((label.h, tuple(label.dens), tuple(label.gens)), RATIO_ZERO)
    return c / label.scale


def _hermiticity_equations(table, derivation, k, gt) -> list[tuple[ParamRatio, str]]:
    eqs = []
    for (i, j), f in table.entries.items():
        el = f + table.involute(f, k)
        eqs += _equations(el, k, f"relation ({gt.names[i]}, {gt.names[j]}) hermiticity")
    for name, im in derivation.images.items():
        el = im - table.involute(im, k)
        eqs += _equations(el, k, f"image of {name} hermiticity")
    return eqs


def _check_linear(eqs, unknowns: set[str], k: int) -> None:
    for e, w in eqs:
        try:
            linear_form(e, [u for u in e.symbols() if u in unknowns])
        except ValueError:
            raise AssertionError(f"order-{k} condition is not linear in order-{k} unknowns ({w})")


def solve_quantization(system, config: AnsatzConfig | None = None) -> QuantizationResult:
    """Solve consistency and Hermiticity conditions for orders ``1..K``."""
    config = config or system.config()
    gt = system.generator_table()
    ans = build_ansatz(system, config)
    corr = [s for s in ans.slots if s.role == "derivation"]
    tab = [s for s in ans.slots if s.role == "table"]
    # correction unknowns are eliminated first so table freedoms stay free
    priority = []
    for group in (corr, tab):
        for s in sorted(group, key=_pivot_key):
            priority += [s.re, s.im]
    params = list(system.parameters)
    eng = _Engine(priority, params)
    for k in range(1, config.K + 1):
        table = ans.table.substitute(eng.values)
        deriv = Derivation(table, {n: e.substitute(eng.values) for n, e in ans.derivation.images.items()})
        eqs = []
        for i in range(gt.n):
            for j in range(i + 1, gt.n):
                d = consistency_defect(i, j, table, deriv, k)
                eqs += _equations(d, k, f"order {k}, pair ({gt.names[i]}, {gt.names[j]})")
        if config.hermiticity:
            eqs += _hermiticity_equations(table, deriv, k, gt)
        order_k = {u for s in ans.slots if s.order == k for u in (s.re, s.im)}
        _check_linear(eqs, order_k, k)
        eng.add(eqs)
        eng.propagate(order=k)

    # correction freedoms left open are set to zero in the reported member
    defaults = {u: RATIO_ZERO for s in corr for u in (s.re, s.im) if u not in eng.values}
    eng.set_values(defaults)
    eng.propagate(order=config.K)
    defaulted = tuple(sorted(defaults, key=_c.symbol_key))

    table = ans.table.substitute(eng.values)
    deriv = Derivation(table, {n: e.substitute(eng.values) for n, e in ans.derivation.images.items()})
    free_tab = [u for s in tab for u in (s.re, s.im) if u not in eng.values and u in table.symbols()]
    labels, subst, label_rel = _present_labels(system, table, config.K, free_tab, tab, config.hermiticity)
    given = [r.substitute(subst) for r in label_rel]
    lin, nonlin = eng.constraints()
    lin = [r.substitute(subst) for r in lin]
    nonlin = [r.substitute(subst) for r in nonlin]
    relations, constraints = _independent(given + lin, nonlin)
    red = _Reducer(relations, constraints)

    def tidy_el(el: NCElement) -> NCElement:
        el = el.substitute(subst)
        return NCElement(el.gt, {k: v for k, v in ((k, red.tidy(c)) for k, c in el.terms.items()) if not v.is_zero()})

    table = CommutationTable(gt, {k: tidy_el(f) for k, f in table.entries.items()})
    deriv = Derivation(table, {n: tidy_el(e) for n, e in deriv.images.items()})
    report = check_table_consistency(table, config.K)
    base = QuantizationResult(
        system=system,
        config=config,
        table=table,
        derivation=deriv,
        integrals={},
        integral_families={},
        free_params=tuple(labels),
        relations=tuple(relations),
        constraints=tuple(constraints),
        assumptions=tuple(eng.assumptions),
        exact=False,
        consistency_report=report,
        defaulted=defaulted,
        pinned=tuple(eng.pinned.items()),
    )
    _verify(base, config.K)
    base = replace(base, exact=_is_exact(base))
    fams = {}
    for name, poly in system.integral_polys().items():
        fams[name] = solve_integral_corrections(ordered_element(poly, gt), base, config, name=name)
    return replace(
        base,
        integrals={n: f.element for n, f in fams.items()},
        integral_families=fams,
    )


def _independent(linear: Sequence[ParamRatio], nonlinear: Sequence[ParamRatio]):
    rel: list[ParamRatio] = []
    for e in linear:
        if e.is_zero() or _Reducer(rel).is_zero(e):
            continue
        rel.append(normalize_relation(e))
    return rel, _new_constraints(rel, [], nonlinear)


def _present_labels(system, table, K, free_tab, tab_slots, hermitian=True):
    """Express free table unknowns through named real labels.

    Returns the label names, the substitution for the raw unknowns and the
    linear relations among labels.
    """
    gt = table.gt
    labels: list[tuple[str, ParamRatio]] = []
    for lab in system.labels:
        v = _label_value(lab, table, K)
        im = (v - v.conjugate()) * (RATIO_I * -HALF)
        if im.is_zero():
            labels.append((lab.name, v))
        elif hermitian:
            raise QuantizationError(f"label {lab.name} is not real: {v}")
        else:
            labels.append((lab.name + "_re", (v + v.conjugate()) * HALF))
            labels.append((lab.name + "_im", im))
    if not free_tab:
        # labels evaluating to numbers are simply fixed
        return [n for n, v in labels if v.has_params()], {}, [
            ParamRatio.symbol(n) - v for n, v in labels
        ]
    counter = 1
    taken = set(gt.names) | {n for n, _ in labels} | set(system.constants) | set(system.parameters)
    for s in tab_slots:
        i, j = (gt.index[x] for x in s.target.split(","))
        f = table.entries.get((i, j))
        if f is None:
            continue
        c = f.terms.get((s.order,) + tuple(s.monomial), RATIO_ZERO)
        if not (c.symbols() & set(free_tab)):
            continue
        if _in_span(c, [v for _, v in labels], free_tab):
            continue
        while f"p{counter}" in taken:
            counter += 1
        name = f"p{counter}"
        taken.add(name)
        im = (c - c.conjugate()) * (RATIO_I * -HALF)
        v = im if not im.is_zero() else (c + c.conjugate()) * HALF
        labels.append((name, v))
    for n, _ in labels:
        declare(n, PARAM)
    eqs = [ParamRatio.symbol(n) - v for n, v in labels]
    names = [n for n, _ in labels]
    sol = solve_parametric_linear(eqs, list(free_tab) + names)
    if not sol.consistent:
        raise QuantizationError("labels are inconsistent with the solved table")
    subst = {u: v for u, v in sol.solution().items() if u in set(free_tab)}
    relations = []
    for u, row in sol.pivots.items():
        if u in subst:
            continue
        e = ParamRatio.symbol(u) + sum((c * ParamRatio.symbol(k) for k, c in row.items() if k is not None), RATIO_ZERO)
        e = e + row.get(None, RATIO_ZERO)
        relations.append(e)
    return names, subst, relations


def _in_span(c: ParamRatio, vectors: Sequence[ParamRatio], unknowns: Sequence[str]) -> bool:
    if not vectors:
        return c.is_zero()
    mus = []
    for k in range(len(vectors)):
        nm = f"_mu{k}"
        declare(nm, PARAM)
        mus.append(nm)
    e = c
    for mu, v in zip(mus, vectors):
        e = e - ParamRatio.symbol(mu) * v
    try:
        form = linear_form(e, unknowns)
    except ValueError:
        return False
    eqs = [v for v in form.values() if not v.is_zero()]
    if not eqs:
        return True
    try:
        sol = solve_parametric_linear(eqs, mus)
    except FreeParameterDivision:
        return False
    return sol.consistent and not sol.residuals


def _verify(result: QuantizationResult, K: int) -> None:
    red = result.reducer()
    for pair, d in result.defects(K).items():
        if not red.element_is_zero(d):
            raise QuantizationError(f"internal: residual defect for pair {pair}: {d}")


def _is_exact(result: QuantizationResult) -> bool:
    """Whether the defects vanish beyond the cap as well (checked two orders higher)."""
    cap = result.K + 2
    red = result.reducer()
    table = result.table
    for i in range(result.gt.n):
        for j in range(i + 1, result.gt.n):
            if not red.element_is_zero(consistency_defect(i, j, table, result.derivation, cap)):
                return False
    for f in table.entries.values():
        if not red.element_is_zero(f + table.involute(f, cap)):
            return False
    for im in result.derivation.images.values():
        if not red.element_is_zero(im - table.involute(im, cap)):
            return False
    return True


# ---------------------------------------------------------------------------
# integrals of motion


def solve_integral_corrections(
    I_classical: NCElement,
    result: QuantizationResult,
    config: AnsatzConfig | None = None,
    *,
    name: str = "I",
) -> IntegralFamily:
    """Find hbar corrections making ``I`` conserved and Hermitian."""
    config = config or result.config
    gt = result.gt
    K = config.K
    slots: list[Slot] = []
    corr = _correction_series(
        gt, "integral", name, f"I{name}", K, config.D_integral, config.den_degree, slots
    )
    I = I_classical + corr
    priority = []
    for s in sorted(slots, key=_pivot_key):
        priority += [s.re, s.im]
    protected = list(result.free_params) + [
        p for p in result.system.parameters if p not in result.free_params
    ]
    eng = _Engine(priority, protected)
    given = list(result.relations) + list(result.constraints)
    eng.add((g, "family constraint") for g in given)
    X = result.derivation
    table = result.table
    for k in range(0, K + 1):
        Ik = I.substitute(eng.values)
        eqs = _equations(X.apply(Ik, k), k, f"conservation of {name} at order {k}")
        if k >= 1 and config.hermiticity:
            eqs += _equations(Ik - table.involute(Ik, k), k, f"hermiticity of {name} at order {k}")
        eng.add(eqs)
        try:
            eng.propagate(order=k)
        except InconsistentSystem as exc:
            raise AnsatzExhausted(
                f"no conserved correction of {name} within degree {config.D_integral}: {exc}",
                order=k,
            ) from exc
    general = I.substitute(eng.values)
    free = tuple(u for s in slots for u in (s.re, s.im) if u not in eng.values and u in general.symbols())
    element = general.substitute({u: RATIO_ZERO for u in free})
    lin, nonlin = eng.constraints(given)
    rel, con = _independent(list(result.relations) + lin, nonlin)
    rel = rel[len(_independent(list(result.relations), [])[0]):]
    red = _Reducer(list(result.relations) + rel, list(result.constraints) + con)

    def tidy_el(el):
        out = {}
        for key, c in el.terms.items():
            if key[0] == 0:
                out[key] = c
                continue
            v = red.tidy(c)
            if not v.is_zero():
                out[key] = v
        return NCElement(el.gt, out)

    return IntegralFamily(
        name=name,
        element=tidy_el(element),
        general=tidy_el(general),
        free=free,
        relations=tuple(rel),
        constraints=tuple(con),
        pinned=tuple(eng.pinned.items()),
    )


# ---------------------------------------------------------------------------
# Heisenberg form


def impose_heisenberg(result: QuantizationResult, H: NCElement) -> QuantizationResult:
    """Require the derivation to be ``(1/(i hbar))[., H]``.

    Images must agree at hbar^0.  Free coefficients of ``H`` that are not
    family parameters are solved for so that higher orders agree too; when
    that is impossible the higher-order corrections are re-fitted to the inner
    derivation, which is accepted only if it passes the consistency check.
    """
    try:
        return _heisenberg(result, H, strict=True)
    except HeisenbergFailure as exc:
        if exc.order is None or exc.order == 0:
            raise
    return _heisenberg(result, H, strict=False)


def _heisenberg(result: QuantizationResult, H: NCElement, strict: bool) -> QuantizationResult:
    gt = result.gt
    K = result.K
    protected = list(result.free_params) + [
        p for p in result.system.parameters if p not in result.free_params
    ]
    h_unknowns = sorted(
        (s for s in H.symbols() if _is_param(s) and s not in protected), key=_c.symbol_key
    )
    eng = _Engine(h_unknowns, protected)
    given = list(result.relations) + list(result.constraints)
    eng.add((g, "family constraint") for g in given)
    table = result.table
    X = result.derivation
    for k in range(0, K + 1):
        Hk = H.substitute(eng.values)
        tk = table.substitute(eng.values)
        eqs = []
        if k == 0 or strict:
            inner = inner_derivation(Hk, tk, k)
            for n in gt.names:
                eqs += _equations(
                    inner.image(n) - X.image(n).substitute(eng.values), k,
                    f"inner derivation image of {n} at order {k}",
                )
        if k >= 1:
            eqs += _equations(Hk - tk.involute(Hk, k), k, f"hermiticity of H at order {k}")
        eng.add(eqs)
        try:
            eng.propagate(order=k)
        except InconsistentSystem as exc:
            raise HeisenbergFailure(
                f"no Hamiltonian in family makes the derivation inner: {exc}", order=k
            ) from exc
    defaults = {u: RATIO_ZERO for u in h_unknowns if u not in eng.values}
    eng.set_values(defaults)
    eng.propagate(order=K)
    vals = eng.values
    lin, nonlin = eng.constraints(given)
    rel, con = _independent(
        list(result.relations) + [r.substitute(vals) for r in lin],
        [r.substitute(vals) for r in list(result.constraints) + nonlin],
    )
    red = _Reducer(rel, con)

    def tidy_el(el):
        el = el.substitute(vals)
        return NCElement(gt, {k: v for k, v in ((k, red.tidy(c)) for k, c in el.terms.items()) if not v.is_zero()})

    Hs = tidy_el(H)
    table2 = CommutationTable(gt, {k: tidy_el(f) for k, f in table.entries.items()})
    assumptions = list(dict.fromkeys(result.assumptions + tuple(eng.assumptions)))
    if strict:
        deriv = Derivation(table2, {n: tidy_el(e) for n, e in X.images.items()})
    else:
        inner = inner_derivation(Hs, table2, K)
        deriv = Derivation(table2, {n: tidy_el(inner.image(n)) for n, e in X.images.items()})
        assumptions.append("derivation corrections re-fitted to the inner derivation of H")
    pins = dict(result.pinned)
    pins.update(eng.pinned)
    narrowed = replace(
        result,
        table=table2,
        derivation=deriv,
        integrals={n: tidy_el(e) for n, e in result.integrals.items()},
        integral_families={
            n: replace(f, element=tidy_el(f.element), general=tidy_el(f.general))
            for n, f in result.integral_families.items()
        },
        free_params=tuple(p for p in result.free_params if p not in vals),
        relations=tuple(rel),
        constraints=tuple(con),
        assumptions=tuple(assumptions),
        defaulted=result.defaulted + tuple(sorted(defaults, key=_c.symbol_key)),
        pinned=tuple(pins.items()),
        hamiltonian=Hs,
        consistency_report=check_table_consistency(table2, K),
    )
    try:
        _verify(narrowed, K)
    except QuantizationError as exc:
        raise HeisenbergFailure(
            f"no Hamiltonian in family makes the derivation inner: {exc}", order=K
        ) from exc
    narrowed = replace(narrowed, exact=_is_exact(narrowed))
    if not strict:
        gt_ = narrowed.gt
        fams = {
            name: solve_integral_corrections(ordered_element(poly, gt_), narrowed, narrowed.config, name=name)
            for name, poly in narrowed.system.integral_polys().items()
        }
        narrowed = replace(
            narrowed,
            integrals={n: f.element for n, f in fams.items()},
            integral_families=fams,
        )
    inner = inner_derivation(Hs, table2, K)
    red2 = narrowed.reducer()
    for n in gt.names:
        if not red2.element_is_zero(inner.image(n) - deriv.image(n)):
            raise HeisenbergFailure(
                f"no Hamiltonian in family makes the derivation inner (image of {n} differs)",
                order=K,
            )
    return narrowed
