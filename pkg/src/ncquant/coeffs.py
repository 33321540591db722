"""Exact coefficient arithmetic.

Coefficients of quantum observables live in the field of rational functions
over the Gaussian rationals ``Q(i)`` in a set of named real symbols.  Symbols
come in two kinds:

* ``constant`` -- system constants (``omega``, ``lam``, ``a1`` ...).  They are
  treated as generic: nonzero and algebraically independent, so they may
  appear in denominators.
* ``param`` -- free parameters and solver unknowns.  They only ever occur
  polynomially; dividing by an expression containing one is an error.

All values are immutable; there is no floating point anywhere here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Scalar",
    "ParamPoly",
    "ParamRatio",
    "HSeries",
    "SolveSpace",
    "CoefficientError",
    "FreeParameterDivision",
    "declare",
    "symbol_kind",
    "is_declared",
    "ratio_arith",
    "conjugate",
    "linear_form",
    "solve_parametric_linear",
]


class CoefficientError(ArithmeticError):
    pass


class FreeParameterDivision(CoefficientError):
    """Raised when a division would invert a free parameter."""


# ---------------------------------------------------------------------------
# symbol registry

_names: list[str] = []
_index: dict[str, int] = {}
_kind: dict[str, str] = {}
_keys: list[tuple] = []

CONSTANT = "constant"
PARAM = "param"


def symbol_key(name: str) -> tuple:
    """Ordering key of a symbol name, independent of declaration history.

    Digit runs compare by value (``x2 < x10``); internal names starting
    with an underscore sort after all user symbols.
    """
    parts = tuple((0, int(t), "") if t.isdigit() else (1, 0, t) for t in re.findall(r"\d+|\D+", name))
    return (name.startswith("_"), parts)


def declare(name: str, kind: str = CONSTANT) -> int:
    """Register ``name`` (idempotent) and return its internal index.

    Term order for printing and leading coefficients follows ``symbol_key``.
    """
    if kind not in (CONSTANT, PARAM):
        raise ValueError(f"unknown symbol kind {kind!r}")
    if name in _index:
        if _kind[name] != kind:
            raise ValueError(
                f"symbol {name!r} already declared as {_kind[name]}, not {kind}"
            )
        return _index[name]
    _index[name] = len(_names)
    _names.append(name)
    _keys.append(symbol_key(name))
    _kind[name] = kind
    return _index[name]


def symbol_kind(name: str) -> str:
    return _kind[name]


def is_declared(name: str) -> bool:
    return name in _index


def _sym_name(i: int) -> str:
    return _names[i]


# ---------------------------------------------------------------------------
# Gaussian rationals


class Scalar:
    """An exact Gaussian rational ``(a + b i) / d``."""

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, re=0, im=0):
        re = Fraction(re)
        im = Fraction(im)
        d = re.denominator * im.denominator // gcd(re.denominator, im.denominator)
        self._set(re.numerator * (d // re.denominator), im.numerator * (d // im.denominator), d)

    def _set(self, a: int, b: int, d: int) -> None:
        if d < 0:
            a, b, d = -a, -b, -d
        g = gcd(gcd(a, b), d)
        if g > 1:
            a //= g
            b //= g
            d //= g
        self._a, self._b, self._d = a, b, d

    @classmethod
    def _raw(cls, a: int, b: int, d: int) -> "Scalar":
        s = cls.__new__(cls)
        s._set(a, b, d)
        return s

    @property
    def re(self) -> Fraction:
        return Fraction(self._a, self._d)

    @property
    def im(self) -> Fraction:
        return Fraction(self._b, self._d)

    def __bool__(self) -> bool:
        return self._a != 0 or self._b != 0

    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            return self._a == other._a and self._b == other._b and self._d == other._d
        if isinstance(other, (int, Fraction)):
            return self._b == 0 and Fraction(self._a, self._d) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._a, self._b, self._d))

    def __add__(self, o: "Scalar") -> "Scalar":
        d1, d2 = self._d, o._d
        if d1 == d2:
            return Scalar._raw(self._a + o._a, self._b + o._b, d1)
        return Scalar._raw(self._a * d2 + o._a * d1, self._b * d2 + o._b * d1, d1 * d2)

    def __neg__(self) -> "Scalar":
        return Scalar._raw(-self._a, -self._b, self._d)

    def __sub__(self, o: "Scalar") -> "Scalar":
        return self + (-o)

    def __mul__(self, o: "Scalar") -> "Scalar":
        a, b, c, e = self._a, self._b, o._a, o._b
        return Scalar._raw(a * c - b * e, a * e + b * c, self._d * o._d)

    def inverse(self) -> "Scalar":
        a, b = self._a, self._b
        n = a * a + b * b
        if n == 0:
            raise ZeroDivisionError("division by zero scalar")
        # d / (a + bi) = d (a - bi) / n
        return Scalar._raw(self._d * a, -self._d * b, n)

    def __truediv__(self, o: "Scalar") -> "Scalar":
        return self * o.inverse()

    def conjugate(self) -> "Scalar":
        return Scalar._raw(self._a, -self._b, self._d)

    def real_part(self) -> "Scalar":
        return Scalar._raw(self._a, 0, self._d)

    def imag_part(self) -> "Scalar":
        return Scalar._raw(self._b, 0, self._d)

    def is_real(self) -> bool:
        return self._b == 0

    def is_one(self) -> bool:
        return self._a == self._d and self._b == 0

    def __complex__(self) -> complex:
        return complex(self._a / self._d, self._b / self._d)

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        re, im = self.re, self.im
        if im == 0:
            return str(re)
        if re == 0:
            if im == 1:
                return "i"
            if im == -1:
                return "-i"
            return f"{im}*i"
        return f"({re} + {im}*i)" if im > 0 else f"({re} - {-im}*i)"


ZERO_S = Scalar(0)
ONE_S = Scalar(1)
I_S = Scalar(0, 1)


def _to_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, complex):
        raise TypeError("floating point values are not allowed in exact coefficients")
    if isinstance(x, float):
        raise TypeError("floating point values are not allowed in exact coefficients")
    return Scalar(x)


# ---------------------------------------------------------------------------
# polynomials

Mono = tuple  # tuple[(sym_index, exponent), ...] sorted by index


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        a, b = m1[i], m2[j]
        if a[0] == b[0]:
            out.append((a[0], a[1] + b[1]))
            i += 1
            j += 1
        elif a[0] < b[0]:
            out.append(a)
            i += 1
        else:
            out.append(b)
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_key(m: Mono):
    return (-sum(e for _, e in m), tuple(sorted((_keys[i], -e) for i, e in m)))


def _mono_str(m: Mono) -> str:
    parts = []
    for i, e in sorted(m, key=lambda t: _keys[t[0]]):
        parts.append(_sym_name(i) if e == 1 else f"{_sym_name(i)}^{e}")
    return "*".join(parts)


class ParamPoly:
    """Sparse multivariate polynomial with Gaussian-rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Mono, Scalar] | None = None):
        # callers must pass nonzero coefficients only
        self.terms: dict[Mono, Scalar] = dict(terms) if terms else {}
        self._hash = None

    @classmethod
    def const(cls, c) -> "ParamPoly":
        c = _to_scalar(c)
        return cls({(): c}) if c else cls()

    @classmethod
    def symbol(cls, name: str) -> "ParamPoly":
        if name not in _index:
            raise KeyError(f"undeclared symbol {name!r}")
        return cls({((_index[name], 1),): ONE_S})

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def scalar_value(self) -> Scalar:
        return self.terms.get((), ZERO_S)

    def symbols(self) -> set[str]:
        return {_sym_name(i) for m in self.terms for i, _ in m}

    def sorted_terms(self) -> list[tuple[Mono, Scalar]]:
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]))

    def leading(self) -> tuple[Mono, Scalar]:
        return min(self.terms.items(), key=lambda t: _mono_key(t[0]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, o: "ParamPoly") -> "ParamPoly":
        if not o.terms:
            return self
        if not self.terms:
            return o
        t = dict(self.terms)
        for m, c in o.terms.items():
            v = t.get(m)
            if v is None:
                t[m] = c
            else:
                v = v + c
                if v:
                    t[m] = v
                else:
                    del t[m]
        return ParamPoly(t)

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, o: "ParamPoly") -> "ParamPoly":
        return self + (-o)

    def __mul__(self, o: "ParamPoly") -> "ParamPoly":
        if not self.terms or not o.terms:
            return ParamPoly()
        t: dict[Mono, Scalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                v = c1 * c2
                w = t.get(m)
                if w is not None:
                    v = w + v
                    if v:
                        t[m] = v
                    else:
                        del t[m]
                else:
                    t[m] = v
        return ParamPoly(t)

    def scale(self, c: Scalar) -> "ParamPoly":
        if not c:
            return ParamPoly()
        if c.is_one():
            return self
        return ParamPoly({m: v * c for m, v in self.terms.items()})

    def __pow__(self, n: int) -> "ParamPoly":
        out = ParamPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self) -> "ParamPoly":
        return ParamPoly({m: c.conjugate() for m, c in self.terms.items()})

    def real_part(self) -> "ParamPoly":
        return ParamPoly({m: c.real_part() for m, c in self.terms.items() if c._a})

    def imag_part(self) -> "ParamPoly":
        return ParamPoly({m: c.imag_part() for m, c in self.terms.items() if c._b})

    def degree_in(self, names: set[str] | frozenset[str]) -> int:
        ids = {_index[n] for n in names if n in _index}
        best = 0
        for m in self.terms:
            best = max(best, sum(e for i, e in m if i in ids))
        return best

    def has_params(self) -> bool:
        return any(_kind[_names[i]] == PARAM for m in self.terms for i, _ in m)

    def __repr__(self) -> str:
        return f"ParamPoly({self})"

    def __str__(self) -> str:
        return _poly_str(self)


def _coeff_mono_str(c: Scalar, m: Mono) -> str:
    """Render one term; the sign is carried in the string."""
    ms = _mono_str(m)
    re, im = c.re, c.im
    if im == 0:
        r = re
        unit = ""
    elif re == 0:
        r = im
        unit = "i"
    else:
        body = f"({c})"
        return body if not ms else f"{body}*{ms}"
    parts = []
    if r == 1:
        pass
    elif r == -1:
        parts.append("-")
    elif r.denominator == 1:
        parts.append(f"{r}*")
    else:
        parts.append(f"({r})*")
    factors = [f for f in (unit, ms) if f]
    if not factors:
        if r in (1, -1):
            return f"{'-' if r == -1 else ''}1"
        return str(r) if r.denominator == 1 else f"({r})"
    return "".join(parts) + "*".join(factors)


def _poly_str(p: ParamPoly) -> str:
    if not p.terms:
        return "0"
    out = ""
    for k, (m, c) in enumerate(p.sorted_terms()):
        s = _coeff_mono_str(c, m)
        if k == 0:
            out = s
        elif s.startswith("-"):
            out += " - " + s[1:]
        else:
            out += " + " + s
    return out


POLY_ZERO = ParamPoly()
POLY_ONE = ParamPoly.const(1)


# ---------------------------------------------------------------------------
# rational functions

def _to_sympy(p: ParamPoly, gens):
    import sympy

    expr = sympy.Integer(0)
    for m, c in p.terms.items():
        t = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
            c.im.numerator, c.im.denominator
        )
        for i, e in m:
            t = t * gens[_names[i]] ** e
        expr += t
    return expr


def _from_sympy_poly(poly, names: Sequence[str]) -> ParamPoly:
    dom = poly.domain
    terms: dict[Mono, Scalar] = {}
    ids = [_index[n] for n in names]
    for exps, c in poly.terms():
        if hasattr(c, "x"):
            re, im = Fraction(int(c.x.numerator), int(c.x.denominator)), Fraction(
                int(c.y.numerator), int(c.y.denominator)
            )
        else:
            if not getattr(c, "is_number", False):
                c = dom.to_sympy(c)
            a, b = c.as_real_imag()
            re, im = Fraction(str(a)), Fraction(str(b))
        s = Scalar(re, im)
        if not s:
            continue
        m = tuple(sorted((ids[k], e) for k, e in enumerate(exps) if e))
        terms[m] = s
    return ParamPoly(terms)


def _cancel_sympy(num: ParamPoly, den: ParamPoly) -> tuple[ParamPoly, ParamPoly]:
    import sympy

    names = sorted(num.symbols() | den.symbols(), key=symbol_key)
    gens = {n: sympy.Symbol(n) for n in names}
    pn = sympy.Poly(_to_sympy(num, gens), *gens.values(), domain="QQ_I")
    pd = sympy.Poly(_to_sympy(den, gens), *gens.values(), domain="QQ_I")
    cn, cd = pn.cancel(pd, include=True)
    return _from_sympy_poly(cn, names), _from_sympy_poly(cd, names)


class ParamRatio:
    """Quotient ``num / den`` in canonical form.

    ``den`` involves only constants, has leading coefficient 1 and no common
    factor with ``num``; the zero ratio is ``0 / 1``.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: ParamPoly, den: ParamPoly | None = None, *, _canonical=False):
        if den is None or _canonical:
            self.num = num
            self.den = POLY_ONE if den is None else den
        else:
            self.num, self.den = _canonicalize(num, den)
        self._hash = None

    @classmethod
    def const(cls, c) -> "ParamRatio":
        return cls(ParamPoly.const(c))

    @classmethod
    def symbol(cls, name: str) -> "ParamRatio":
        return cls(ParamPoly.symbol(name))

    def is_zero(self) -> bool:
        return not self.num.terms

    def is_scalar(self) -> bool:
        return self.den.is_scalar() and self.num.is_scalar()

    def scalar_value(self) -> Scalar:
        if not self.is_scalar():
            raise ValueError(f"{self} is not a scalar")
        return self.num.scalar_value()

    def symbols(self) -> set[str]:
        return self.num.symbols() | self.den.symbols()

    def has_params(self) -> bool:
        return self.num.has_params()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Scalar)):
            other = ParamRatio.const(other)
        if not isinstance(other, ParamRatio):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __add__(self, o) -> "ParamRatio":
        o = _ratio(o)
        if self.den == o.den:
            if self.den.is_scalar():
                return ParamRatio(self.num + o.num, self.den, _canonical=True)
            return ParamRatio(self.num + o.num, self.den)
        return ParamRatio(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "ParamRatio":
        return ParamRatio(-self.num, self.den, _canonical=True)

    def __sub__(self, o) -> "ParamRatio":
        return self + (-_ratio(o))

    def __rsub__(self, o) -> "ParamRatio":
        return _ratio(o) - self

    def __mul__(self, o) -> "ParamRatio":
        o = _ratio(o)
        if self.den.is_scalar() and o.den.is_scalar():
            return ParamRatio(self.num * o.num, POLY_ONE, _canonical=True)
        return ParamRatio(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def scale(self, c: Scalar) -> "ParamRatio":
        if not c:
            return RATIO_ZERO
        return ParamRatio(self.num.scale(c), self.den, _canonical=True)

    def __truediv__(self, o) -> "ParamRatio":
        o = _ratio(o)
        if o.is_zero():
            raise ZeroDivisionError("division by zero ParamRatio")
        if o.num.has_params():
            raise FreeParameterDivision(
                f"cannot divide by {o.num}: free parameters are never inverted"
            )
        return ParamRatio(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, o) -> "ParamRatio":
        return _ratio(o) / self

    def __pow__(self, n: int) -> "ParamRatio":
        out = RATIO_ONE
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self) -> "ParamRatio":
        return ParamRatio(self.num.conjugate(), self.den.conjugate())

    def substitute(self, values: Mapping[str, "ParamRatio"]) -> "ParamRatio":
        """Replace symbols by ratios; symbols not in ``values`` are kept."""
        if not values or not (self.symbols() & values.keys()):
            return self
        return _subst_poly(self.num, values) / _subst_poly(self.den, values)

    def __repr__(self) -> str:
        return f"ParamRatio({self})"

    def __str__(self) -> str:
        if self.den.is_scalar() and self.den.scalar_value().is_one():
            return str(self.num)
        n = str(self.num)
        if len(self.num.terms) > 1:
            n = f"({n})"
        d = str(self.den)
        if len(self.den.terms) > 1 or len(next(iter(self.den.terms))) > 1 or any(
            e > 1 for _, e in next(iter(self.den.terms))
        ):
            d = f"({d})"
        return f"{n}/{d}"


def _subst_poly(p: ParamPoly, values: Mapping[str, ParamRatio]) -> ParamRatio:
    total = RATIO_ZERO
    cache: dict[tuple[int, int], ParamRatio] = {}
    for m, c in p.terms.items():
        keep: list = []
        term = ParamRatio(ParamPoly({(): c}), POLY_ONE, _canonical=True)
        for i, e in m:
            nm = _names[i]
            v = values.get(nm)
            if v is None:
                keep.append((i, e))
            else:
                key = (i, e)
                if key not in cache:
                    cache[key] = v ** e
                term = term * cache[key]
        if keep:
            term = term * ParamRatio(ParamPoly({tuple(keep): ONE_S}), POLY_ONE, _canonical=True)
        total = total + term
    return total


def _canonicalize(num: ParamPoly, den: ParamPoly) -> tuple[ParamPoly, ParamPoly]:
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if num.is_zero():
        return POLY_ZERO, POLY_ONE
    if den.has_params():
        raise FreeParameterDivision(f"denominator {den} contains a free parameter")
    if len(den.terms) == 1:
        (dm, dc), = den.terms.items()
        inv = dc.inverse()
        if not dm:
            return num.scale(inv), POLY_ONE
        # cancel the common monomial factor
        common = dict(dm)
        for m in num.terms:
            md = dict(m)
            for i in list(common):
                e = min(common[i], md.get(i, 0))
                if e:
                    common[i] = e
                else:
                    del common[i]
            if not common:
                break
        if common:
            def div(m):
                return tuple((i, e - common.get(i, 0)) for i, e in m if e - common.get(i, 0))
            num = ParamPoly({div(m): c for m, c in num.terms.items()})
            dm = div(dm)
        num = num.scale(inv)
        return num, (ParamPoly({dm: ONE_S}) if dm else POLY_ONE)
    num, den = _cancel_sympy(num, den)
    _, lc = den.leading()
    if not lc.is_one():
        inv = lc.inverse()
        num, den = num.scale(inv), den.scale(inv)
    if den.is_scalar():
        return num, POLY_ONE
    return num, den


def _ratio(x) -> ParamRatio:
    if isinstance(x, ParamRatio):
        return x
    if isinstance(x, ParamPoly):
        return ParamRatio(x)
    return ParamRatio.const(x)


RATIO_ZERO = ParamRatio(POLY_ZERO)
RATIO_ONE = ParamRatio(POLY_ONE)
RATIO_I = ParamRatio(ParamPoly.const(I_S))


def ratio_arith(a: ParamRatio, b: ParamRatio, op: str) -> ParamRatio:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# hbar series


class HSeries:
    """Truncated series ``sum_k hbar^k parts[k]`` for ``k <= order_cap``."""

    __slots__ = ("order_cap", "parts")

    def __init__(self, parts: Sequence[ParamRatio], order_cap: int | None = None):
        cap = len(parts) - 1 if order_cap is None else order_cap
        if cap < 0:
            raise ValueError("order cap must be nonnegative")
        ps = [_ratio(p) for p in parts[: cap + 1]]
        ps += [RATIO_ZERO] * (cap + 1 - len(ps))
        self.order_cap = cap
        self.parts = tuple(ps)

    def __getitem__(self, k: int) -> ParamRatio:
        return self.parts[k] if 0 <= k <= self.order_cap else RATIO_ZERO

    def valuation(self) -> int | None:
        for k, p in enumerate(self.parts):
            if not p.is_zero():
                return k
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def _cap(self, o: "HSeries") -> int:
        return min(self.order_cap, o.order_cap)

    def __add__(self, o: "HSeries") -> "HSeries":
        k = self._cap(o)
        return HSeries([self[j] + o[j] for j in range(k + 1)], k)

    def __neg__(self) -> "HSeries":
        return HSeries([-p for p in self.parts], self.order_cap)

    def __sub__(self, o: "HSeries") -> "HSeries":
        return self + (-o)

    def __mul__(self, o: "HSeries") -> "HSeries":
        k = self._cap(o)
        out = [RATIO_ZERO] * (k + 1)
        for a in range(k + 1):
            if self[a].is_zero():
                continue
            for b in range(k + 1 - a):
                if not o[b].is_zero():
                    out[a + b] = out[a + b] + self[a] * o[b]
        return HSeries(out, k)

    def conjugate(self) -> "HSeries":
        return HSeries([p.conjugate() for p in self.parts], self.order_cap)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HSeries):
            return NotImplemented
        return self.order_cap == other.order_cap and self.parts == other.parts

    def __hash__(self) -> int:
        return hash((self.order_cap, self.parts))

    def __repr__(self) -> str:
        terms = [f"hbar^{k}*({p})" for k, p in enumerate(self.parts) if not p.is_zero()]
        return f"HSeries({' + '.join(terms) or '0'}, K={self.order_cap})"


def conjugate(a):
    """Complex conjugation ``i -> -i``; symbols and hbar are real."""
    return a.conjugate()


# ---------------------------------------------------------------------------
# parametric linear solving


@dataclass(frozen=True)
class SolveSpace:
    consistent: bool
    particular: dict[str, ParamRatio]
    null_basis: list[dict[str, ParamRatio]]
    pivots: dict[str, dict[str | None, ParamRatio]] = field(default_factory=dict)
    free: tuple[str, ...] = ()
    assumptions: tuple[str, ...] = ()
    residuals: tuple[ParamRatio, ...] = ()
    contradiction: ParamRatio | None = None

    def solution(self, free_values: Mapping[str, ParamRatio] | None = None) -> dict[str, ParamRatio]:
        """Pivot unknowns expressed through free unknowns (kept symbolic by default)."""
        out: dict[str, ParamRatio] = {}
        for u, row in self.pivots.items():
            v = -row.get(None, RATIO_ZERO)
            for f, c in row.items():
                if f is None:
                    continue
                fv = ParamRatio.symbol(f) if free_values is None else free_values.get(f, RATIO_ZERO)
                v = v - c * fv
            out[u] = v
        return out


def linear_form(expr: ParamRatio, unknowns: Iterable[str]) -> dict[str | None, ParamRatio]:
    """Split ``expr`` into coefficients of ``unknowns`` plus a constant (key ``None``).

    Raises ``ValueError`` if ``expr`` is not of degree <= 1 in the unknowns.
    """
    ids = {_index[u] for u in unknowns if u in _index}
    parts: dict[str | None, dict[Mono, Scalar]] = {}
    for m, c in expr.num.terms.items():
        hit = [(i, e) for i, e in m if i in ids]
        if not hit:
            parts.setdefault(None, {})[m] = c
            continue
        if len(hit) > 1 or hit[0][1] != 1:
            raise ValueError(f"equation {expr} is not linear in the unknowns")
        rest = tuple(t for t in m if t[0] != hit[0][0])
        parts.setdefault(_names[hit[0][0]], {})[rest] = c
    return {k: ParamRatio(ParamPoly(v), expr.den) for k, v in parts.items()}


def _pivot_rank(c: ParamRatio):
    if c.has_params():
        return None
    if c.is_scalar():
        return (0, 0)
    return (1, len(c.num.terms) + len(c.den.terms))


def solve_parametric_linear(
    equations: Sequence[ParamRatio | Mapping[str | None, ParamRatio]],
    unknowns: Sequence[str],
) -> SolveSpace:
    """Gaussian elimination over the field of rational functions in constants.

    ``equations`` are expressions (read as ``expr = 0``) or explicit linear
    forms.  Constants are generic: any nonzero constant-only expression may
    serve as a pivot, and each non-numeric pivot is logged as an assumption.
    Constant terms may contain free parameters; rows that reduce to a
    parameter-only remainder are returned as ``residuals``.
    """
    order = {u: k for k, u in enumerate(unknowns)}
    rows: list[dict[str | None, ParamRatio]] = []
    for eq in equations:
        form = linear_form(eq, unknowns) if isinstance(eq, ParamRatio) else dict(eq)
        form = {k: v for k, v in form.items() if not v.is_zero()}
        if form:
            rows.append(form)

    assumptions: list[str] = []
    pivots: dict[str, dict[str | None, ParamRatio]] = {}
    pending = rows
    for u in unknowns:
        best = None
        for r, row in enumerate(pending):
            c = row.get(u)
            if c is None:
                continue
            rank = _pivot_rank(c)
            if rank is None:
                raise FreeParameterDivision(
                    f"coefficient {c} of {u} contains a free parameter"
                )
            if best is None or rank < best[0]:
                best = (rank, r)
        if best is None:
            continue
        prow = pending.pop(best[1])
        pc = prow[u]
        if not pc.is_scalar():
            note = nonzero_note(pc)
            if note not in assumptions:
                assumptions.append(note)
        inv = RATIO_ONE / pc
        prow = {k: v * inv for k, v in prow.items()}
        prow[u] = RATIO_ONE
        pending = [_eliminate(row, prow, u) for row in pending]
        pending = [row for row in pending if row]
        for v, vrow in pivots.items():
            if u in vrow:
                pivots[v] = _eliminate(vrow, prow, u)
        pivots[u] = prow

    residuals: list[ParamRatio] = []
    contradiction = None
    for row in pending:
        # every unknown column is gone; only the constant term remains
        c = row.get(None, RATIO_ZERO)
        if c.is_zero():
            continue
        if c.has_params():
            residuals.append(c)
        elif contradiction is None:
            contradiction = c

    free = tuple(u for u in unknowns if u not in pivots)
    ordered = dict(sorted(pivots.items(), key=lambda kv: order[kv[0]]))
    particular = {u: RATIO_ZERO for u in unknowns}
    for u, row in ordered.items():
        particular[u] = -row.get(None, RATIO_ZERO)
    basis = []
    for f in free:
        vec = {u: RATIO_ZERO for u in unknowns}
        vec[f] = RATIO_ONE
        for u, row in ordered.items():
            c = row.get(f)
            if c is not None:
                vec[u] = -c
        basis.append(vec)
    return SolveSpace(
        consistent=contradiction is None,
        particular=particular,
        null_basis=basis,
        pivots={u: {k: v for k, v in row.items() if k != u} for u, row in ordered.items()},
        free=free,
        assumptions=tuple(assumptions),
        residuals=tuple(residuals),
        contradiction=contradiction,
    )


def nonzero_note(c: ParamRatio) -> str:
    """``"c != 0"`` for the numerator of ``c``, scaled to a monic leading term."""
    num = c.num
    _, lc = num.leading()
    return f"{num.scale(lc.inverse())} != 0"


def _eliminate(row, prow, u):
    c = row.get(u)
    if c is None:
        return row
    out = dict(row)
    del out[u]
    for k, v in prow.items():
        if k == u:
            continue
        nv = out.get(k, RATIO_ZERO) - c * v
        if nv.is_zero():
            out.pop(k, None)
        else:
            out[k] = nv
    return out
