"""Shared strategies and cached solver runs for the test suite."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from hypothesis import strategies as st

from ncquant.coeffs import PARAM, ParamPoly, ParamRatio, Scalar, declare
from ncquant.ncalg import CommutationTable, GeneratorTable, NCElement
from ncquant.solver import solve_quantization
from ncquant.sysio import load_example

CONSTS = ("u1", "u2", "u3")
PARAMS = ("tp1", "tp2")
for _n in CONSTS:
    declare(_n)
for _n in PARAMS:
    declare(_n, PARAM)

small = st.integers(-3, 3)
fractions = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))
scalars = st.builds(Scalar, fractions, fractions)


def _monomial(names, max_exp=2):
    return st.tuples(*[st.integers(0, max_exp) for _ in names])


def polys(names=CONSTS, max_terms=3, max_exp=2):
    def build(terms):
        p = ParamPoly()
        for c, exps in terms:
            t = ParamPoly.const(c)
            for n, e in zip(names, exps):
                for _ in range(e):
                    t = t * ParamPoly.symbol(n)
            p = p + t
        return p

    return st.lists(st.tuples(scalars, _monomial(names, max_exp)), max_size=max_terms).map(build)


def _denominators():
    u1, u2, u3 = (ParamRatio.symbol(n) for n in CONSTS)
    one = ParamRatio.const(1)
    return (one, u1, u1 + one, u2 * u2 + u1, u1 * u3 - ParamRatio.const(2))


DENOMINATORS = _denominators()


def ratios(with_params=False, max_terms=3, max_exp=2):
    names = CONSTS + (PARAMS if with_params else ())
    return st.builds(
        lambda p, d: ParamRatio(p) / d,
        polys(names, max_terms, max_exp),
        st.sampled_from(DENOMINATORS),
    )


def elements(table: CommutationTable, max_terms=4, degree=2, max_h=1, coeffs=None):
    gt = table.gt
    monos = gt.monomials_up_to(degree)
    coeffs = coeffs if coeffs is not None else st.builds(ParamRatio.const, scalars)

    def build(terms):
        out: dict = {}
        for h, m, c in terms:
            key = (h, m.den_exps, m.gen_exps)
            out[key] = out.get(key, ParamRatio.const(0)) + c
        return NCElement(gt, {k: v for k, v in out.items() if not v.is_zero()})

    return st.lists(
        st.tuples(st.integers(0, max_h), st.sampled_from(monos), coeffs), max_size=max_terms
    ).map(build)


@lru_cache(maxsize=None)
def solved(name: str):
    spec = load_example(name)
    return spec, solve_quantization(spec)


def euler_table(f=("1", "1", "1")) -> CommutationTable:
    """``[L1, L2] = i hbar f3 L3`` and cyclic, with numeric or symbolic ``f``."""
    gt = GeneratorTable(["L1", "L2", "L3"])
    fs = [ParamRatio.symbol(x) if x.isidentifier() else ParamRatio.const(int(x)) for x in f]
    i = ParamRatio.const(Scalar(0, 1))

    def ih(c, name):
        return gt.gen(name).scale(i * c).shift_hbar(1)

    return CommutationTable(gt, {
        ("L1", "L2"): -ih(fs[2], "L3"),
        ("L1", "L3"): ih(fs[1], "L2"),
        ("L2", "L3"): -ih(fs[0], "L1"),
    })
