from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ncquant.coeffs import ParamRatio, Scalar
from ncquant.dynamics import Derivation, apply, flow_substitute, formal_flow, inner_derivation
from ncquant.ncalg import AlgebraError

from helpers import elements, solved

I = ParamRatio.const(Scalar(0, 1))
R = ParamRatio.symbol
C = ParamRatio.const


def magnetic_pinned():
    spec, r = solved("magnetic_particle")
    k = -R("q") * R("B") / (R("c") * R("m") ** 2)
    return spec, r.specialize({"k": k})


def euler_member(a, f12):
    """Euler solution with numeric ``a`` and ``f`` chosen on ``a . f = 0``."""
    spec, r = solved("euler_top")
    f1, f2 = f12
    f3 = -(a[0] * f1 + a[1] * f2) / a[2]
    vals = {"a1": a[0], "a2": a[1], "a3": a[2], "f1": f1, "f2": f2, "f3": f3}
    return r.specialize({k: C(v) for k, v in vals.items()})


def test_unit_is_annihilated():
    _, r = solved("euler_top")
    assert apply(r.derivation, r.gt.one(), 1).is_zero()


def test_euler_image():
    spec, r = solved("euler_top")
    expected = spec.element("a1*L2*L3") + r.gt.gen("L1").scale(
        -I * R("a1") * R("f1") / C(2)
    ).shift_hbar(1)
    assert apply(r.derivation, r.gt.gen("L1"), 1) == expected


def test_euler_leibniz_example():
    _, r = solved("euler_top")
    gt, T, D = r.gt, r.table, r.derivation
    l1, l2 = gt.gen("L1"), gt.gen("L2")
    lhs = D.apply(T.mul(l1, l2, 1), 1)
    rhs = T.mul(D.apply(l1, 1), l2, 1) + T.mul(l1, D.apply(l2, 1), 1)
    assert lhs == rhs


def test_missing_image_rejected():
    _, r = solved("magnetic_particle")
    with pytest.raises(AlgebraError):
        Derivation(r.table, {"v_x": r.gt.zero()})


def test_inner_derivation_of_unit():
    _, r = solved("magnetic_particle")
    D = inner_derivation(r.gt.one(), r.table, 1)
    assert all(e.is_zero() for e in D.images.values())


def test_inner_derivation_magnetic():
    spec, r = magnetic_pinned()
    D = inner_derivation(r.integrals["H"], r.table, 1)
    wc = R("q") * R("B") / (R("m") * R("c"))
    assert D.image("v_x") == r.gt.gen("v_y").scale(wc)
    assert D.image("v_y") == r.gt.gen("v_x").scale(-wc)
    assert D == r.derivation


def test_flow_order_zero():
    _, r = solved("euler_top")
    fl = formal_flow(r.derivation, 0, 1)
    assert all(fl[n] == (r.gt.gen(n),) for n in r.gt.names)


def test_magnetic_flow():
    spec, r = magnetic_pinned()
    fl = formal_flow(r.derivation, 2, 1)
    wc = R("q") * R("B") / (R("m") * R("c"))
    vx, vy = r.gt.gen("v_x"), r.gt.gen("v_y")
    assert fl["v_x"] == (vx, vy.scale(wc), vx.scale(-wc * wc))
    # series value at t: coefficient m carries t^m / m!
    series = flow_substitute(vx, fl, r.table)
    assert series[2] == vx.scale(-wc * wc / C(2))


def test_flow_recurrence():
    _, r = solved("nonlinear_oscillator")
    fl = formal_flow(r.derivation, 3, 2)
    for n in r.gt.names:
        for m in range(3):
            assert fl[n][m + 1] == r.derivation.apply(fl[n][m], 2)


def test_negative_flow_order():
    _, r = solved("magnetic_particle")
    with pytest.raises(ValueError):
        formal_flow(r.derivation, -1, 1)


@pytest.mark.parametrize("name", ["magnetic_particle", "pais_uhlenbeck"])
def test_flow_conserves_integrals(name):
    _, r = solved(name)
    fl = formal_flow(r.derivation, 3, r.K)
    for I_ in r.integrals.values():
        series = flow_substitute(I_, fl, r.table)
        assert series[0] == I_
        assert all(s.is_zero() for s in series[1:])


nonzero = st.integers(1, 4).flatmap(lambda n: st.sampled_from([n, -n]))
rationals = st.builds(Fraction, st.integers(-3, 3), st.integers(1, 3))
euler_members = st.builds(
    euler_member, st.tuples(nonzero, nonzero, nonzero), st.tuples(rationals, rationals)
)


@given(euler_members, st.data())
@settings(max_examples=30)
def test_leibniz_random(r, data):
    T, D = r.table, r.derivation
    a = data.draw(elements(T))
    b = data.draw(elements(T))
    assert D.apply(T.mul(a, b, 2), 2) == T.mul(D.apply(a, 2), b, 2) + T.mul(a, D.apply(b, 2), 2)


@given(euler_members, st.data())
@settings(max_examples=30)
def test_inner_derivation_is_leibniz(r, data):
    T = r.table
    H = data.draw(elements(T, max_h=0))
    D = inner_derivation(H, T, 2)
    a = data.draw(elements(T))
    b = data.draw(elements(T))
    assert D.apply(T.mul(a, b, 2), 2) == T.mul(D.apply(a, 2), b, 2) + T.mul(a, D.apply(b, 2), 2)


@given(euler_members, st.data())
@settings(max_examples=30)
def test_derivation_commutes_with_involution(r, data):
    T, D = r.table, r.derivation
    b = data.draw(elements(T))
    a = b + T.involute(b, 2)
    assert T.involute(D.apply(a, 2), 2) == D.apply(T.involute(a, 2), 2)
