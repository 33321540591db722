"""Ordered noncommutative algebra of quantum observables.

Elements are finite sums of ordered monomials

    hbar^h * d_1^{m_1} ... d_r^{m_r} * x_1^{N_1} ... x_n^{N_n}

with denominators ``d_t = q_t^{-1}`` leftmost and generators in declaration
order.  A :class:`CommutationTable` holds, for each pair ``i < j``, the
correction in ``x_j x_i = x_i x_j + sum_k hbar^k f_k^{ij}`` and knows how to
bring any product back to this ordered form.

Denominator polynomials may only involve a prefix of the generator list whose
members commute exactly; on that prefix the relation ``d q = 1`` is used to
keep the generator degree below the leading monomial of ``q``.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .coeffs import (
    HSeries,
    ParamRatio,
    RATIO_ONE,
    RATIO_ZERO,
    _ratio,
)

__all__ = [
    "AlgebraError",
    "GeneratorTable",
    "OrderedMonomial",
    "NCElement",
    "CommutationTable",
    "normal_order",
    "nc_mul",
    "involute",
    "hbar_div",
    "commutator",
    "localize_reduce",
    "coeff_string",
]


class AlgebraError(ValueError):
    pass


class OrderedMonomial(NamedTuple):
    den_exps: tuple[int, ...]
    gen_exps: tuple[int, ...]


def _graded_key(exps: Sequence[int]):
    # larger total degree first, then lexicographic in declaration order
    return (-sum(exps), tuple(-e for e in exps))


class GeneratorTable:
    """Ordered generator names plus declared denominators ``d = 1/q``.

    ``denominators`` is a sequence of ``(name, q)`` where ``q`` maps generator
    exponent tuples to coefficients.
    """

    def __init__(
        self,
        names: Sequence[str],
        denominators: Sequence[tuple[str, Mapping[tuple[int, ...], object]]] = (),
    ):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise AlgebraError("duplicate generator names")
        self.index = {n: k for k, n in enumerate(self.names)}
        n = len(self.names)
        dens = []
        support: set[int] = set()
        for dname, q in denominators:
            if dname in self.index:
                raise AlgebraError(f"denominator {dname!r} clashes with a generator")
            qq = {tuple(e): _ratio(c) for e, c in q.items() if not _ratio(c).is_zero()}
            if any(len(e) != n for e in qq):
                raise AlgebraError(f"denominator {dname!r}: exponent length mismatch")
            lead = max((e for e in qq if any(e)), key=lambda e: (sum(e), e), default=None)
            if lead is None:
                raise AlgebraError(f"denominator {dname!r} must depend on a generator")
            lc = qq[lead]
            if lc.has_params():
                raise AlgebraError(
                    f"denominator {dname!r}: leading coefficient {lc} must be invertible"
                )
            for e in qq:
                support.update(k for k, v in enumerate(e) if v)
            dens.append((dname, qq, lead))
        if support and support != set(range(len(support))):
            raise AlgebraError(
                "denominator polynomials may only use a leading prefix of the generators"
            )
        self.denominators = tuple(dens)
        self.den_names = tuple(d[0] for d in dens)
        self.den_index = {d: k for k, d in enumerate(self.den_names)}
        self.prefix = len(support)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def r(self) -> int:
        return len(self.den_names)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeneratorTable):
            return NotImplemented
        return (
            self.names == other.names
            and tuple((d, q) for d, q, _ in self.denominators)
            == tuple((d, q) for d, q, _ in other.denominators)
        )

    def __hash__(self) -> int:
        return hash((self.names, self.den_names))

    def unit_key(self) -> OrderedMonomial:
        return OrderedMonomial((0,) * self.r, (0,) * self.n)

    def gen_key(self, j: int) -> OrderedMonomial:
        g = [0] * self.n
        g[j] = 1
        return OrderedMonomial((0,) * self.r, tuple(g))

    def den_key(self, t: int) -> OrderedMonomial:
        d = [0] * self.r
        d[t] = 1
        return OrderedMonomial(tuple(d), (0,) * self.n)

    def one(self) -> "NCElement":
        return NCElement(self, {(0,) + self.unit_key(): RATIO_ONE})

    def zero(self) -> "NCElement":
        return NCElement(self, {})

    def scalar(self, c) -> "NCElement":
        c = _ratio(c)
        return NCElement(self, {} if c.is_zero() else {(0,) + self.unit_key(): c})

    def hbar(self, k: int = 1) -> "NCElement":
        return NCElement(self, {(k,) + self.unit_key(): RATIO_ONE})

    def gen(self, name: str) -> "NCElement":
        if name in self.index:
            return NCElement(self, {(0,) + self.gen_key(self.index[name]): RATIO_ONE})
        if name in self.den_index:
            return NCElement(self, {(0,) + self.den_key(self.den_index[name]): RATIO_ONE})
        raise AlgebraError(f"unknown symbol {name!r}")

    def monomial(self, den_exps=None, gen_exps=None, coeff=RATIO_ONE, h: int = 0) -> "NCElement":
        d = tuple(den_exps) if den_exps is not None else (0,) * self.r
        g = tuple(gen_exps) if gen_exps is not None else (0,) * self.n
        c = _ratio(coeff)
        return NCElement(self, {} if c.is_zero() else {(h, d, g): c})

    def monomial_str(self, dens: Sequence[int], gens: Sequence[int]) -> str:
        parts = []
        for name, e in list(zip(self.den_names, dens)) + list(zip(self.names, gens)):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return " ".join(parts)

    def monomials_up_to(self, degree: int, den_degree: int = 0) -> list[OrderedMonomial]:
        """Canonical ordered monomials of generator degree <= ``degree``.

        Denominator exponents run up to ``den_degree``; monomials reducible by
        ``d q = 1`` are skipped.
        """
        out = []
        gens = _exponent_tuples(self.n, degree)
        dens = [d for d in _exponent_tuples(self.r, den_degree)]
        for d in dens:
            for g in gens:
                if self._reducible(d, g) is None:
                    out.append(OrderedMonomial(d, g))
        out.sort(key=lambda m: (_graded_key(m.den_exps), _graded_key(m.gen_exps)))
        return out

    def _reducible(self, dens, gens):
        for t, (_, _, lead) in enumerate(self.denominators):
            if dens[t] and all(g >= l for g, l in zip(gens, lead)):
                return t
        return None


def _exponent_tuples(n: int, degree: int) -> list[tuple[int, ...]]:
    if n == 0:
        return [()]
    out = []
    for first in range(degree + 1):
        for rest in _exponent_tuples(n - 1, degree - first):
            out.append((first,) + rest)
    return out


# ---------------------------------------------------------------------------
# elements

Key = tuple  # (h, dens, gens)


def _acc(out: dict, key, c: ParamRatio) -> None:
    v = out.get(key)
    if v is None:
        if not c.is_zero():
            out[key] = c
    else:
        v = v + c
        if v.is_zero():
            del out[key]
        else:
            out[key] = v


class NCElement:
    """Normal-ordered element: mapping ``(h, dens, gens) -> coefficient``."""

    __slots__ = ("gt", "terms", "_hash")

    def __init__(self, gt: GeneratorTable, terms: Mapping[Key, ParamRatio]):
        self.gt = gt
        self.terms: dict[Key, ParamRatio] = dict(terms)
        self._hash = None

    # -- structure ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def valuation(self) -> int | None:
        return min((k[0] for k in self.terms), default=None)

    def max_hbar(self) -> int:
        return max((k[0] for k in self.terms), default=-1)

    def monomials(self) -> list[OrderedMonomial]:
        ms = {OrderedMonomial(k[1], k[2]) for k in self.terms}
        return sorted(ms, key=lambda m: (_graded_key(m.den_exps), _graded_key(m.gen_exps)))

    def coefficient(self, mono: OrderedMonomial | tuple, order_cap: int | None = None) -> HSeries:
        mono = OrderedMonomial(*mono)
        cap = self.max_hbar() if order_cap is None else order_cap
        cap = max(cap, 0)
        parts = [self.terms.get((h, mono.den_exps, mono.gen_exps), RATIO_ZERO) for h in range(cap + 1)]
        return HSeries(parts, cap)

    def hbar_part(self, h: int) -> "NCElement":
        """Terms of hbar-degree exactly ``h`` (still carrying ``hbar^h``)."""
        return NCElement(self.gt, {k: c for k, c in self.terms.items() if k[0] == h})

    def truncate(self, K: int) -> "NCElement":
        return NCElement(self.gt, {k: c for k, c in self.terms.items() if k[0] <= K})

    def coefficients(self) -> Iterator[ParamRatio]:
        return iter(self.terms.values())

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for c in self.terms.values():
            out |= c.symbols()
        return out

    # -- linear structure ----------------------------------------------------
    def _check(self, o: "NCElement") -> None:
        if o.gt is not self.gt and o.gt != self.gt:
            raise AlgebraError("elements belong to different generator tables")

    def __add__(self, o) -> "NCElement":
        if not isinstance(o, NCElement):
            o = self.gt.scalar(o)
        self._check(o)
        out = dict(self.terms)
        for k, c in o.terms.items():
            _acc(out, k, c)
        return NCElement(self.gt, out)

    __radd__ = __add__

    def __neg__(self) -> "NCElement":
        return NCElement(self.gt, {k: -c for k, c in self.terms.items()})

    def __sub__(self, o) -> "NCElement":
        if not isinstance(o, NCElement):
            o = self.gt.scalar(o)
        return self + (-o)

    def __rsub__(self, o) -> "NCElement":
        return (-self) + o

    def scale(self, c) -> "NCElement":
        c = _ratio(c)
        if c.is_zero():
            return self.gt.zero()
        out = {}
        for k, v in self.terms.items():
            _acc(out, k, v * c)
        return NCElement(self.gt, out)

    def shift_hbar(self, k: int) -> "NCElement":
        return NCElement(self.gt, {(key[0] + k,) + key[1:]: c for key, c in self.terms.items()})

    def map_coeffs(self, f) -> "NCElement":
        out = {}
        for k, c in self.terms.items():
            _acc(out, k, f(c))
        return NCElement(self.gt, out)

    def substitute(self, values: Mapping[str, ParamRatio]) -> "NCElement":
        if not values:
            return self
        return self.map_coeffs(lambda c: c.substitute(values))

    def conjugate_coeffs(self) -> "NCElement":
        return self.map_coeffs(lambda c: c.conjugate())

    # -- comparison / printing -------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, NCElement):
            return NotImplemented
        return self.gt == other.gt and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def sorted_terms(self) -> list[tuple[Key, ParamRatio]]:
        return sorted(
            self.terms.items(),
            key=lambda kv: (kv[0][0], _graded_key(kv[0][1]), _graded_key(kv[0][2])),
        )

    def term_strings(self) -> list[tuple[str, str]]:
        """(coefficient string, monomial string) pairs in canonical order."""
        return [
            (coeff_string(c, k[0]), self.gt.monomial_str(k[1], k[2]))
            for k, c in self.sorted_terms()
        ]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for n, (cs, ms) in enumerate(self.term_strings()):
            if ms:
                if cs == "1":
                    s = ms
                elif cs == "-1":
                    s = "-" + ms
                else:
                    s = f"{cs} {ms}"
            else:
                s = cs
            if n == 0:
                out = s
            elif s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out

    def __repr__(self) -> str:
        return f"NCElement({self})"


def coeff_string(c: ParamRatio, h: int = 0) -> str:
    """Exact string for ``hbar^h * c``, e.g. ``(-1/2)*i*hbar*a1*f1``."""
    hb = "" if h == 0 else ("hbar" if h == 1 else f"hbar^{h}")
    num = c.num
    den = "" if c.den.is_scalar() else str(c.den)
    if den and (len(c.den.terms) > 1 or "*" in den or "^" in den):
        den = f"({den})"
    if len(num.terms) == 1:
        (m, s), = num.terms.items()
        if s.is_real() or s.re == 0:
            r = s.re if s.is_real() else s.im
            unit = "" if s.is_real() else "i"
            from .coeffs import _mono_str

            factors = [f for f in (unit, hb, _mono_str(m)) if f]
            if r == 1 or r == -1:
                body = "*".join(factors) if factors else "1"
                body = ("-" if r == -1 else "") + body
            else:
                rs = str(r) if r.denominator == 1 and r > 0 else f"({r})"
                body = "*".join([rs] + factors)
            return body + (f"/{den}" if den else "")
    body = f"({num})"
    if hb:
        body = f"{hb}*{body}"
    return body + (f"/{den}" if den else "")


# ---------------------------------------------------------------------------
# commutation table and the rewriting engine


class CommutationTable:
    """Pairwise reordering corrections plus the normal-ordering engine.

    ``entries[(i, j)]`` (``i < j``, generator indices or names) is the element
    ``F`` with ``x_j x_i = x_i x_j + F``; it must have hbar-valuation >= 1.
    Missing pairs commute exactly.
    """

    def __init__(self, gt: GeneratorTable, entries: Mapping[tuple, NCElement] | None = None):
        self.gt = gt
        ent: dict[tuple[int, int], NCElement] = {}
        for (a, b), f in (entries or {}).items():
            i = gt.index[a] if isinstance(a, str) else a
            j = gt.index[b] if isinstance(b, str) else b
            if i == j:
                raise AlgebraError("a generator always commutes with itself")
            if i > j:
                # x_i x_j = x_j x_i + F  <=>  x_i x_j - x_j x_i = F; stored form is
                # x_j x_i = x_i x_j - F
                i, j, f = j, i, -f
            if f.gt != gt:
                raise AlgebraError("table entry over a different generator table")
            if f.is_zero():
                continue
            v = f.valuation()
            if v is not None and v < 1:
                raise AlgebraError(
                    f"entry for ({gt.names[i]}, {gt.names[j]}) must vanish in the classical limit"
                )
            if i < gt.prefix and j < gt.prefix:
                raise AlgebraError(
                    "generators used in denominators must commute exactly with each other"
                )
            ent[(i, j)] = f
        self.entries = ent
        self._mono_cache: dict = {}
        self._gen_cache: dict = {}
        self._den_cache: dict = {}
        self._gd_cache: dict = {}
        self._rev_cache: dict = {}
        self._red_cache: dict = {}

    def entry(self, i, j) -> NCElement:
        i = self.gt.index[i] if isinstance(i, str) else i
        j = self.gt.index[j] if isinstance(j, str) else j
        if i < j:
            return self.entries.get((i, j), self.gt.zero())
        if i > j:
            return -self.entries.get((j, i), self.gt.zero())
        return self.gt.zero()

    def substitute(self, values: Mapping[str, ParamRatio]) -> "CommutationTable":
        return CommutationTable(self.gt, {k: f.substitute(values) for k, f in self.entries.items()})

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for f in self.entries.values():
            out |= f.symbols()
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, CommutationTable):
            return NotImplemented
        return self.gt == other.gt and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.entries)))

    # -- reduction of d q = 1 ---------------------------------------------
    def _reduce(self, dens, gens) -> dict:
        """Canonical form of ``d^dens x^gens`` as {(dens, gens): coeff}."""
        key = (dens, gens)
        hit = self._red_cache.get(key)
        if hit is not None:
            return hit
        t = self.gt._reducible(dens, gens)
        if t is None:
            out = {key: RATIO_ONE}
        else:
            _, q, lead = self.gt.denominators[t]
            inv = RATIO_ONE / q[lead]
            base = tuple(g - l for g, l in zip(gens, lead))
            out: dict = {}
            # d^m x^base * lead = d^m x^base (q - rest)/lc
            dm1 = tuple(e - (1 if s == t else 0) for s, e in enumerate(dens))
            for k, c in self._reduce(dm1, base).items():
                _acc(out, k, c * inv)
            for e, c in q.items():
                if e == lead:
                    continue
                g2 = tuple(a + b for a, b in zip(base, e))
                for k, v in self._reduce(dens, g2).items():
                    _acc(out, k, -(c * inv) * v)
        self._red_cache[key] = out
        return out

    def _canon(self, h, dens, gens, c, out) -> None:
        if self.gt.denominators and any(dens):
            for (d2, g2), v in self._reduce(dens, gens).items():
                _acc(out, (h, d2, g2), c * v)
        else:
            _acc(out, (h, dens, gens), c)

    # -- products of ordered monomials ------------------------------------
    def _right_gen(self, terms: dict, j: int, K: int) -> dict:
        out: dict = {}
        for (h, d, g), c in terms.items():
            for (h2, d2, g2), v in self._mul_gen(d, g, j, K - h).items():
                _acc(out, (h + h2, d2, g2), c * v)
        return out

    def _right_den(self, terms: dict, t: int, K: int) -> dict:
        out: dict = {}
        for (h, d, g), c in terms.items():
            for (h2, d2, g2), v in self._mul_den(d, g, t, K - h).items():
                _acc(out, (h + h2, d2, g2), c * v)
        return out

    def _mul_gen(self, dens, gens, j: int, K: int) -> dict:
        """Ordered monomial times generator ``j`` on the right."""
        if K < 0:
            return {}
        key = (dens, gens, j, K)
        hit = self._gen_cache.get(key)
        if hit is not None:
            return hit
        last = max((k for k, e in enumerate(gens) if e), default=-1)
        out: dict = {}
        if last <= j:
            g2 = list(gens)
            g2[j] += 1
            self._canon(0, dens, tuple(g2), RATIO_ONE, out)
        else:
            g1 = list(gens)
            g1[last] -= 1
            g1 = tuple(g1)
            # X' x_l x_j = (X' x_j) x_l + X' F^{j,l}
            out = self._right_gen(self._mul_gen(dens, g1, j, K), last, K)
            f = self.entries.get((j, last))
            if f is not None:
                for (hf, df, gf), cf in f.terms.items():
                    if hf > K:
                        continue
                    for k2, v in self._mul_mono((dens, g1), (df, gf), K - hf).items():
                        _acc(out, (k2[0] + hf,) + k2[1:], cf * v)
        self._gen_cache[key] = out
        return out

    def _gen_den(self, l: int, t: int, K: int) -> dict:
        """Normal form of ``x_l d_t``."""
        if K < 0:
            return {}
        key = (l, t, K)
        hit = self._gd_cache.get(key)
        if hit is not None:
            return hit
        gt = self.gt
        dkey = gt.den_key(t)
        out: dict = {}
        self._canon(0, dkey.den_exps, gt.gen_key(l).gen_exps, RATIO_ONE, out)
        if l >= gt.prefix:
            _, q, _ = gt.denominators[t]
            # [x_l, d] = -d [x_l, q] d
            qel = {(0, (0,) * gt.r, e): c for e, c in q.items()}
            xl = {(0,) + tuple(gt.gen_key(l)): RATIO_ONE}
            comm = self._mul_terms(xl, qel, K)
            for k, v in self._mul_terms(qel, xl, K).items():
                _acc(comm, k, -v)
            left = {}
            for (h, d, g), c in comm.items():
                d2 = tuple(a + (1 if s == t else 0) for s, a in enumerate(d))
                self._canon(h, d2, g, c, left)
            for k, v in self._right_den(left, t, K).items():
                _acc(out, k, -v)
        self._gd_cache[key] = out
        return out

    def _mul_den(self, dens, gens, t: int, K: int) -> dict:
        """Ordered monomial times denominator ``t`` on the right."""
        if K < 0:
            return {}
        key = (dens, gens, t, K)
        hit = self._den_cache.get(key)
        if hit is not None:
            return hit
        last = max((k for k, e in enumerate(gens) if e), default=-1)
        out: dict = {}
        if last < 0:
            d2 = tuple(a + (1 if s == t else 0) for s, a in enumerate(dens))
            self._canon(0, d2, gens, RATIO_ONE, out)
        else:
            g1 = list(gens)
            g1[last] -= 1
            g1 = tuple(g1)
            for (h, d, g), c in self._gen_den(last, t, K).items():
                for k2, v in self._mul_mono((dens, g1), (d, g), K - h).items():
                    _acc(out, (k2[0] + h,) + k2[1:], c * v)
        self._den_cache[key] = out
        return out

    def _mul_mono(self, a, b, K: int) -> dict:
        if K < 0:
            return {}
        key = (a, b, K)
        hit = self._mono_cache.get(key)
        if hit is not None:
            return hit
        terms = {(0,) + tuple(a): RATIO_ONE}
        bd, bg = b
        for t, e in enumerate(bd):
            for _ in range(e):
                terms = self._right_den(terms, t, K)
        for j, e in enumerate(bg):
            for _ in range(e):
                terms = self._right_gen(terms, j, K)
        self._mono_cache[key] = terms
        return terms

    def _mul_terms(self, A: Mapping, B: Mapping, K: int) -> dict:
        out: dict = {}
        for (h1, d1, g1), c1 in A.items():
            if h1 > K:
                continue
            for (h2, d2, g2), c2 in B.items():
                h = h1 + h2
                if h > K:
                    continue
                c = c1 * c2
                for (h3, d3, g3), v in self._mul_mono((d1, g1), (d2, g2), K - h).items():
                    _acc(out, (h + h3, d3, g3), c * v)
        return out

    # -- public operations ---------------------------------------------------
    def mul(self, a: NCElement, b: NCElement, K: int) -> NCElement:
        if a.gt != self.gt or b.gt != self.gt:
            raise AlgebraError("elements do not belong to this table's algebra")
        return NCElement(self.gt, self._mul_terms(a.terms, b.terms, K))

    def product(self, factors: Sequence[NCElement], K: int) -> NCElement:
        out = self.gt.one()
        for f in factors:
            out = self.mul(out, f, K)
        return out

    def power(self, a: NCElement, n: int, K: int) -> NCElement:
        return self.product([a] * n, K)

    def commutator(self, a: NCElement, b: NCElement, K: int) -> NCElement:
        return self.mul(a, b, K) - self.mul(b, a, K)

    def word(self, symbols: Iterable[str], K: int) -> NCElement:
        gt = self.gt
        terms = {(0,) + tuple(gt.unit_key()): RATIO_ONE}
        for s in symbols:
            if s in gt.index:
                terms = self._right_gen(terms, gt.index[s], K)
            elif s in gt.den_index:
                terms = self._right_den(terms, gt.den_index[s], K)
            else:
                raise AlgebraError(f"unknown symbol {s!r} in word")
        return NCElement(gt, terms)

    def _reversed(self, dens, gens, K: int) -> dict:
        key = (dens, gens, K)
        hit = self._rev_cache.get(key)
        if hit is not None:
            return hit
        gt = self.gt
        terms = {(0,) + tuple(gt.unit_key()): RATIO_ONE}
        for j in reversed(range(gt.n)):
            for _ in range(gens[j]):
                terms = self._right_gen(terms, j, K)
        for t in reversed(range(gt.r)):
            for _ in range(dens[t]):
                terms = self._right_den(terms, t, K)
        self._rev_cache[key] = terms
        return terms

    def involute(self, a: NCElement, K: int) -> NCElement:
        out: dict = {}
        for (h, d, g), c in a.terms.items():
            if h > K:
                continue
            cc = c.conjugate()
            for (h2, d2, g2), v in self._reversed(d, g, K - h).items():
                _acc(out, (h + h2, d2, g2), cc * v)
        return NCElement(self.gt, out)

    def localize_reduce(self, a: NCElement, K: int) -> NCElement:
        out: dict = {}
        for (h, d, g), c in a.terms.items():
            if h <= K:
                self._canon(h, d, g, c, out)
        return NCElement(self.gt, out)


# ---------------------------------------------------------------------------
# functional interface


def normal_order(w: Sequence[str], table: CommutationTable, K: int) -> NCElement:
    """Normal form of the word ``w`` (generator and denominator names)."""
    return table.word(w, K)


def nc_mul(a: NCElement, b: NCElement, table: CommutationTable, K: int) -> NCElement:
    return table.mul(a, b, K)


def commutator(a: NCElement, b: NCElement, table: CommutationTable, K: int) -> NCElement:
    return table.commutator(a, b, K)


def involute(a: NCElement, table: CommutationTable, K: int) -> NCElement:
    """Anti-automorphism fixing generators and conjugating coefficients."""
    return table.involute(a, K)


def hbar_div(a: NCElement, k: int) -> NCElement:
    """Divide by ``hbar^k``; every term must carry at least ``hbar^k``."""
    out = {}
    for (h, d, g), c in a.terms.items():
        if h < k:
            raise AlgebraError(f"not divisible by hbar^{k}: term of hbar-degree {h}")
        out[(h - k, d, g)] = c
    return NCElement(a.gt, out)


def localize_reduce(a: NCElement, table: CommutationTable, K: int) -> NCElement:
    return table.localize_reduce(a, K)
