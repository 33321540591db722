import pytest
from hypothesis import given, settings, strategies as st

from ncquant.coeffs import ParamRatio, Scalar, declare
from ncquant.ncalg import (
    AlgebraError,
    CommutationTable,
    GeneratorTable,
    NCElement,
    commutator,
    hbar_div,
    involute,
    localize_reduce,
    nc_mul,
    normal_order,
)

from helpers import elements, euler_table

for _n in ("m", "lam", "a1"):
    declare(_n)
for _n in ("k", "f1", "f2", "f3"):
    declare(_n, "param")

I = ParamRatio.const(Scalar(0, 1))
R = ParamRatio.symbol


def magnetic_table():
    gt = GeneratorTable(["v_x", "v_y"])
    return CommutationTable(gt, {("v_x", "v_y"): gt.hbar().scale(I * R("k"))})


def oscillator_table():
    lam = R("lam")
    gt = GeneratorTable(["x", "y"], [("d", {(0, 0): 1, (2, 0): lam})])
    one_plus = gt.one() + gt.monomial(gen_exps=(2, 0), coeff=lam)
    return CommutationTable(gt, {("x", "y"): one_plus.scale(-I).shift_hbar(1)})


MAG = magnetic_table()
EUL = euler_table(("f1", "f2", "f3"))
OSC = oscillator_table()


def test_ordered_word_is_unchanged():
    gt = GeneratorTable(["x1", "x2"])
    t = CommutationTable(gt)
    assert normal_order(["x1", "x2"], t, 1) == gt.monomial(gen_exps=(1, 1))


def test_magnetic_swap():
    gt = MAG.gt
    expected = gt.monomial(gen_exps=(1, 1)) + gt.hbar().scale(I * R("k"))
    assert normal_order(["v_y", "v_x"], MAG, 1) == expected


def test_double_swap():
    gt = MAG.gt
    expected = gt.monomial(gen_exps=(1, 2)) + gt.monomial(
        gen_exps=(0, 1), coeff=ParamRatio.const(2) * I * R("k"), h=1
    )
    assert normal_order(["v_y", "v_y", "v_x"], MAG, 1) == expected


def test_euler_swap():
    gt = EUL.gt
    expected = gt.monomial(gen_exps=(1, 0, 1)) + gt.gen("L2").scale(I * R("f2")).shift_hbar(1)
    assert normal_order(["L3", "L1"], EUL, 1) == expected


def test_unknown_symbol():
    with pytest.raises(AlgebraError):
        normal_order(["v_z"], MAG, 1)


def test_mul_examples():
    gt = MAG.gt
    vx, vy = gt.gen("v_x"), gt.gen("v_y")
    assert nc_mul(gt.one(), vx, MAG, 1) == vx
    assert nc_mul(vx, vy, MAG, 1) == gt.monomial(gen_exps=(1, 1))
    assert nc_mul(vy, vx, MAG, 1) == normal_order(["v_y", "v_x"], MAG, 1)


def test_euler_associativity_example():
    gt = EUL.gt
    l1 = gt.gen("L1")
    l23 = normal_order(["L2", "L3"], EUL, 2)
    left = nc_mul(l23, l1, EUL, 2)
    right = nc_mul(gt.gen("L2"), normal_order(["L3", "L1"], EUL, 2), EUL, 2)
    assert left == right


def test_involute_examples():
    gt = MAG.gt
    assert involute(gt.gen("v_x"), MAG, 1) == gt.gen("v_x")
    assert involute(gt.monomial(gen_exps=(1, 1)), MAG, 1) == normal_order(["v_y", "v_x"], MAG, 1)
    e = EUL.gt
    corrected = e.monomial(gen_exps=(0, 1, 1), coeff=R("a1")) + e.gen("L1").scale(
        -I * R("a1") * R("f1") / ParamRatio.const(2)
    ).shift_hbar(1)
    assert involute(corrected, EUL, 1) == corrected


def test_hbar_div():
    gt = MAG.gt
    e = gt.gen("v_x")
    assert hbar_div(e.shift_hbar(1), 1) == e
    H = (normal_order(["v_x", "v_x"], MAG, 1) + normal_order(["v_y", "v_y"], MAG, 1)).scale(
        R("m") / ParamRatio.const(2)
    )
    c = commutator(gt.gen("v_x"), H, MAG, 1)
    assert c == gt.gen("v_y").scale(-I * R("m") * R("k")).shift_hbar(1)
    assert hbar_div(c, 1).scale(-I) == gt.gen("v_y").scale(-R("m") * R("k"))
    with pytest.raises(AlgebraError, match="not divisible"):
        hbar_div(e, 1)


def test_localization_examples():
    gt = OSC.gt
    raw = NCElement(gt, {(0, (1,), (0, 0)): ParamRatio.const(1), (0, (1,), (2, 0)): R("lam")})
    assert localize_reduce(raw, OSC, 2) == gt.one()
    d = gt.monomial(den_exps=(1,))
    two = ParamRatio.const(2)
    assert normal_order(["y", "d"], OSC, 2) == gt.monomial((1,), (0, 1)) + gt.monomial(
        (1,), (1, 0), two * I * R("lam"), h=1
    )
    assert normal_order(["y", "d", "d"], OSC, 3) == gt.monomial((2,), (0, 1)) + gt.monomial(
        (2,), (1, 0), two * two * I * R("lam"), h=1
    )
    assert nc_mul(d, gt.gen("x"), OSC, 2) == nc_mul(gt.gen("x"), d, OSC, 2)


def test_denominator_generators_must_commute():
    gt = GeneratorTable(["x", "y"], [("d", {(0, 0): 1, (1, 1): 1})])
    with pytest.raises(AlgebraError):
        CommutationTable(gt, {("x", "y"): gt.hbar()})


def test_denominator_needs_prefix():
    with pytest.raises(AlgebraError):
        GeneratorTable(["x", "y"], [("d", {(0, 0): 1, (0, 2): 1})])


def test_classical_limit_required():
    gt = GeneratorTable(["x", "y"])
    with pytest.raises(AlgebraError):
        CommutationTable(gt, {("x", "y"): gt.one()})


TABLES = [MAG, EUL, OSC]


def _words(table, max_len=5):
    names = list(table.gt.names) + list(table.gt.den_names)
    return st.lists(st.sampled_from(names), max_size=max_len)


@st.composite
def table_and_word(draw):
    table = draw(st.sampled_from(TABLES))
    return table, draw(_words(table))


@given(table_and_word(), st.data())
@settings(max_examples=60)
def test_reduction_order_independent(tw, data):
    table, w = tw
    k = data.draw(st.integers(0, len(w)))
    whole = normal_order(w, table, 3)
    assert nc_mul(normal_order(w[:k], table, 3), normal_order(w[k:], table, 3), table, 3) == whole


def _respell(e: NCElement, table) -> NCElement:
    gt = e.gt
    out = gt.zero()
    for (h, d, g), c in e.terms.items():
        w = [n for n, x in zip(gt.den_names, d) for _ in range(x)]
        w += [n for n, x in zip(gt.names, g) for _ in range(x)]
        out = out + normal_order(w, table, 3).scale(c).shift_hbar(h)
    return out.truncate(3)


@given(table_and_word())
@settings(max_examples=60)
def test_normal_order_idempotent(tw):
    table, w = tw
    e = normal_order(w, table, 3)
    assert _respell(e, table) == e


@given(st.data())
@settings(max_examples=60)
def test_involution_anti_automorphism(data):
    table = data.draw(st.sampled_from([MAG, EUL]))
    a = data.draw(elements(table))
    b = data.draw(elements(table))
    K = 3
    ab = nc_mul(a, b, table, K)
    assert involute(ab, table, K) == nc_mul(involute(b, table, K), involute(a, table, K), table, K)
    assert involute(involute(a, table, K), table, K) == a.truncate(K)


@given(st.data())
@settings(max_examples=60)
def test_classical_limit_commutes(data):
    table = data.draw(st.sampled_from(TABLES))
    a = data.draw(elements(table, max_h=0))
    b = data.draw(elements(table, max_h=0))
    assert nc_mul(a, b, table, 2).hbar_part(0) == nc_mul(b, a, table, 2).hbar_part(0)
