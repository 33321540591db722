"""Derivations of the ordered algebra and their formal time flows."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Mapping

from .coeffs import RATIO_I, RATIO_ONE, ParamRatio
from .ncalg import AlgebraError, CommutationTable, NCElement, _acc, hbar_div

__all__ = [
    "Derivation",
    "FlowSeries",
    "apply",
    "inner_derivation",
    "formal_flow",
    "flow_substitute",
]


class Derivation:
    """A derivation fixed by the images of the generators.

    Images of denominators are derived from ``D(d) = -d D(q) d``; the image of
    the unit is zero.
    """

    def __init__(self, table: CommutationTable, images: Mapping[str, NCElement]):
        gt = table.gt
        missing = set(gt.names) - set(images)
        if missing:
            raise AlgebraError(f"missing images for {sorted(missing)}")
        extra = set(images) - set(gt.names)
        if extra:
            raise AlgebraError(f"images given for unknown generators {sorted(extra)}")
        self.table = table
        self.images = {n: images[n] for n in gt.names}
        self._cache: dict = {}

    @property
    def gt(self):
        return self.table.gt

    def image(self, name: str) -> NCElement:
        return self.images[name]

    def substitute(self, values: Mapping[str, ParamRatio], table: CommutationTable | None = None):
        t = table if table is not None else self.table.substitute(values)
        return Derivation(t, {n: e.substitute(values) for n, e in self.images.items()})

    def with_table(self, table: CommutationTable) -> "Derivation":
        return Derivation(table, self.images)

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for e in self.images.values():
            out |= e.symbols()
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.images == other.images

    def __repr__(self) -> str:
        body = ", ".join(f"{n}: {e}" for n, e in self.images.items())
        return f"Derivation({body})"

    # -- evaluation -------------------------------------------------------
    def _den_image(self, t: int, K: int) -> dict:
        key = ("den", t, K)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        gt = self.gt
        _, q, _ = gt.denominators[t]
        dq: dict = {}
        for e, c in q.items():
            for k, v in self._mono_image((0,) * gt.r, e, K).items():
                _acc(dq, k, c * v)
        dd = {(0,) + tuple(gt.den_key(t)): RATIO_ONE}
        out = self.table._mul_terms(self.table._mul_terms(dd, dq, K), dd, K)
        out = {k: -v for k, v in out.items()}
        self._cache[key] = out
        return out

    def _mono_image(self, dens, gens, K: int) -> dict:
        if K < 0:
            return {}
        key = (dens, gens, K)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        gt = self.gt
        T = self.table
        out: dict = {}
        last = max((k for k, e in enumerate(gens) if e), default=-1)
        if last >= 0:
            g1 = list(gens)
            g1[last] -= 1
            g1 = tuple(g1)
            left = {(0, dens, g1): RATIO_ONE}
            xl = {(0,) + tuple(gt.gen_key(last)): RATIO_ONE}
            # D(M' x) = D(M') x + M' D(x)
            out = T._mul_terms(self._mono_image(dens, g1, K), xl, K)
            for k, v in T._mul_terms(left, self.images[gt.names[last]].terms, K).items():
                _acc(out, k, v)
        else:
            lastd = max((k for k, e in enumerate(dens) if e), default=-1)
            if lastd >= 0:
                d1 = list(dens)
                d1[lastd] -= 1
                d1 = tuple(d1)
                left = {(0, d1, gens): RATIO_ONE}
                dl = {(0,) + tuple(gt.den_key(lastd)): RATIO_ONE}
                out = T._mul_terms(self._mono_image(d1, gens, K), dl, K)
                for k, v in T._mul_terms(left, self._den_image(lastd, K), K).items():
                    _acc(out, k, v)
        self._cache[key] = out
        return out

    def apply(self, a: NCElement, K: int) -> NCElement:
        out: dict = {}
        for (h, d, g), c in a.terms.items():
            if h > K:
                continue
            for (h2, d2, g2), v in self._mono_image(d, g, K - h).items():
                _acc(out, (h + h2, d2, g2), c * v)
        return NCElement(self.gt, out)


def apply(D: Derivation, a: NCElement, K: int) -> NCElement:
    """Apply ``D`` to ``a`` through the Leibniz rule, truncating at ``hbar^K``."""
    return D.apply(a, K)


def inner_derivation(H: NCElement, table: CommutationTable, K: int) -> Derivation:
    """The derivation ``(1/(i hbar)) [., H]`` with images up to ``hbar^K``.

    The commutators are taken one order higher so that the images are complete
    through ``hbar^K``; table entries beyond the stored orders are zero.
    """
    gt = table.gt
    minus_i = -RATIO_I
    images = {}
    for name in gt.names:
        x = gt.gen(name)
        c = table.commutator(x, H, K + 1)
        images[name] = hbar_div(c, 1).scale(minus_i)
    return Derivation(table, images)


@dataclass(frozen=True)
class FlowSeries:
    """``x_i(t) = sum_m t^m/m! * coefficients[x_i][m]`` for ``m <= M``."""

    coefficients: dict[str, tuple[NCElement, ...]]
    time_order: int
    order_cap: int

    def __getitem__(self, name: str) -> tuple[NCElement, ...]:
        return self.coefficients[name]


def formal_flow(D: Derivation, M: int, K: int) -> FlowSeries:
    """Lie series ``exp(t D)`` applied to each generator, up to ``t^M``."""
    if M < 0:
        raise ValueError("time order must be nonnegative")
    coeffs = {}
    for name in D.gt.names:
        seq = [D.gt.gen(name)]
        for _ in range(M):
            seq.append(D.apply(seq[-1], K))
        coeffs[name] = tuple(seq)
    return FlowSeries(coeffs, M, K)


def flow_substitute(a: NCElement, flow: FlowSeries, table: CommutationTable) -> list[NCElement]:
    """Evaluate ``a`` at the flowed generators; returns coefficients of ``t^m``.

    Only polynomial elements are supported (no denominators).
    """
    gt = table.gt
    M, K = flow.time_order, flow.order_cap
    series = {}
    for name in gt.names:
        series[name] = [
            c.scale(ParamRatio.const(1) / factorial(m)) for m, c in enumerate(flow[name])
        ]
    total = [gt.zero() for _ in range(M + 1)]
    for (h, d, g), c in a.terms.items():
        if any(d):
            raise NotImplementedError("flow substitution into denominators is not supported")
        term = [gt.monomial(h=h, coeff=c)] + [gt.zero()] * M
        for j, e in enumerate(g):
            for _ in range(e):
                s = series[gt.names[j]]
                new = [gt.zero() for _ in range(M + 1)]
                for p in range(M + 1):
                    if term[p].is_zero():
                        continue
                    for q in range(M + 1 - p):
                        new[p + q] = new[p + q] + table.mul(term[p], s[q], K)
                term = new
        total = [x + y for x, y in zip(total, term)]
    return total
