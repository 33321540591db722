from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ncquant.coeffs import (
    CoefficientError,
    FreeParameterDivision,
    HSeries,
    ParamPoly,
    ParamRatio,
    Scalar,
    conjugate,
    declare,
    linear_form,
    ratio_arith,
    solve_parametric_linear,
)

from helpers import ratios, scalars

R = ParamRatio.symbol
C = ParamRatio.const
I = C(Scalar(0, 1))

for _n in ("q", "B", "m", "c", "a1", "a2", "a3"):
    declare(_n)
for _n in ("f1", "f2", "f3", "k", "f", "g"):
    declare(_n, "param")


def test_scalar_lowest_terms():
    s = Scalar(Fraction(2, 4), Fraction(-6, 8))
    assert s.re == Fraction(1, 2) and s.im == Fraction(-3, 4)
    assert Scalar(Fraction(1, -3)).re.denominator == 3


def test_scalar_rejects_floats():
    with pytest.raises(TypeError):
        C(0.5)


def test_add_halves():
    assert ratio_arith(C(Fraction(1, 2)), C(Fraction(1, 2)), "add") == C(1)


def test_self_division():
    assert ratio_arith(R("a1"), R("a1"), "div") == C(1)


def test_magnetic_coefficient():
    out = ratio_arith(I * R("q") * R("B"), R("m") ** 2 * R("c"), "div")
    assert out == (I * R("B") / R("c")) * (R("q") / R("m") ** 2)
    # symbols print in name order
    assert str(out) == "i*B*q/(c*m^2)"


def test_division_errors():
    with pytest.raises(ZeroDivisionError):
        ratio_arith(C(1), C(0), "div")
    with pytest.raises(FreeParameterDivision):
        ratio_arith(C(1), R("k"), "div")
    assert issubclass(FreeParameterDivision, CoefficientError)


def test_common_factor_cancels():
    a1, a2 = R("a1"), R("a2")
    assert (a1 * a2 + a1) / (a1 * (a2 + C(1))) == C(1)
    x = (a1 * a1 - a2 * a2) / (a1 + a2)
    assert x == a1 - a2
    assert x.den == ParamPoly.const(1)


def test_denominator_is_monic():
    x = C(1) / (C(3) * R("a1") + C(6))
    _, lc = x.den.leading()
    assert lc.is_one()


def test_conjugate_examples():
    h = HSeries([C(0), I * R("k")])
    assert conjugate(h) == HSeries([C(0), -I * R("k")])
    assert conjugate(HSeries([C(3)])) == HSeries([C(3)])


@given(ratios(with_params=True))
def test_conjugate_involution(a):
    assert conjugate(conjugate(a)) == a


@given(ratios(), ratios(), ratios())
@settings(max_examples=40, deadline=None)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == C(0)


@given(ratios(), ratios())
@settings(max_examples=40, deadline=None)
def test_conjugate_is_homomorphism(a, b):
    assert conjugate(a * b) == conjugate(a) * conjugate(b)
    assert conjugate(a + b) == conjugate(a) + conjugate(b)


@given(scalars, scalars)
def test_scalar_field(a, b):
    if b:
        assert (a / b) * b == a


@given(st.lists(ratios(), min_size=1, max_size=3), st.lists(ratios(), min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_hseries_graded(pa, pb):
    a = HSeries([C(0)] + pa, 3)
    b = HSeries(pb, 3)
    prod = a * b
    if prod.is_zero():
        return
    assert prod.valuation() >= a.valuation() + b.valuation()
    assert prod.order_cap == 3


def test_hseries_truncates():
    a = HSeries([C(0), C(1)], 2)
    assert (a * a * a).is_zero()
    assert (a * a)[2] == C(1)


def test_single_equation():
    x = "_tx"
    declare(x, "param")
    sol = solve_parametric_linear([R(x) - C(5)], [x])
    assert sol.consistent
    assert sol.particular == {x: C(5)}
    assert sol.null_basis == []


def test_orthogonality_null_space():
    a1, a2, a3 = R("a1"), R("a2"), R("a3")
    eq = a1 * R("f1") + a2 * R("f2") + a3 * R("f3")
    sol = solve_parametric_linear([eq], ["f1", "f2", "f3"])
    assert sol.consistent
    assert all(v.is_zero() for v in sol.particular.values())
    assert sol.null_basis == [
        {"f1": -a2 / a1, "f2": C(1), "f3": C(0)},
        {"f1": -a3 / a1, "f2": C(0), "f3": C(1)},
    ]
    for vec in sol.null_basis:
        assert eq.substitute(vec).is_zero()
    assert sol.assumptions == ("a1 != 0",)


def test_empty_system_leaves_all_free():
    sol = solve_parametric_linear([], ["f", "g"])
    assert sol.consistent and sol.free == ("f", "g")
    assert len(sol.null_basis) == 2


def test_contradiction_detected():
    declare("_ty", "param")
    sol = solve_parametric_linear([R("_ty") - C(1), R("_ty") - C(2)], ["_ty"])
    assert not sol.consistent
    assert sol.contradiction is not None


def test_nonlinear_form_rejected():
    with pytest.raises(ValueError):
        linear_form(R("f1") * R("f2"), ["f1", "f2"])


small_ratios = ratios(max_terms=2, max_exp=1)


@given(st.lists(st.tuples(small_ratios, small_ratios, small_ratios), min_size=1, max_size=3))
@settings(max_examples=25, deadline=None)
def test_solutions_satisfy_system(rows):
    declare("_s1", "param")
    declare("_s2", "param")
    eqs = [a * R("_s1") + b * R("_s2") + c for a, b, c in rows]
    sol = solve_parametric_linear(eqs, ["_s1", "_s2"])
    if not sol.consistent:
        return
    for e in eqs:
        assert e.substitute(sol.particular).is_zero()
        for vec in sol.null_basis:
            shifted = {u: sol.particular[u] + vec[u] for u in vec}
            assert e.substitute(shifted).is_zero()
