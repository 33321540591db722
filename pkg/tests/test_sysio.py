import json

import pytest
from hypothesis import given, settings, strategies as st

from ncquant.solver import impose_heisenberg
from ncquant.sysio import (
    EXAMPLES,
    ParseError,
    element_from_string,
    format_expr,
    format_system,
    load_example,
    load_result_json,
    parse_expr,
    parse_system,
    render_result,
)
from ncquant.sysio import element_string

from helpers import solved

PU_TEXT = """
system pu
constants w1 w2
generators x1 x2 x3 x4
evolution
  x1' = x2
  x2' = x3
  x3' = x4
  x4' = -(w1^2 + w2^2)*x3 - w1^2*w2^2*x1
"""


def test_pais_uhlenbeck_text():
    spec = parse_system(PU_TEXT)
    assert spec.generators == ("x1", "x2", "x3", "x4")
    field = spec.classical_field()
    assert field == load_example("pais_uhlenbeck").classical_field()
    assert spec.integrals == ()


def test_undeclared_symbol_located():
    text = PU_TEXT.replace("x1' = x2", "x1' = x2 + z")
    with pytest.raises(ParseError) as exc:
        parse_system(text)
    err = exc.value
    assert "'z'" in str(err)
    assert (err.line, err.col) == (6, 14)


@pytest.mark.parametrize(
    "bad, fragment",
    [
        ("x1' = x2^(1/2)", "natural"),
        ("x1' = x2^-1", "natural"),
        ("x1' = x2/x3", "denominator"),
        ("x1' = (x2", "expected"),
        ("x1 = x2", "NAME'"),
    ],
)
def test_located_errors(bad, fragment):
    with pytest.raises(ParseError) as exc:
        parse_system(PU_TEXT.replace("x1' = x2", bad))
    assert fragment in str(exc.value)
    assert exc.value.line >= 1 and exc.value.col >= 1


def test_missing_equation():
    with pytest.raises(ParseError, match="x4"):
        parse_system(PU_TEXT.replace("  x4' = -(w1^2 + w2^2)*x3 - w1^2*w2^2*x1\n", ""))


def test_euler_example():
    spec = load_example("euler_top")
    assert spec.generators == ("L1", "L2", "L3")
    assert spec.classical_field()["L1"] == spec.classical_field()["L1"]
    assert format_expr(dict(spec.evolution)["L1"]) == "a1*L2*L3"


def test_pais_uhlenbeck_integrals():
    spec = load_example("pais_uhlenbeck")
    assert [n for n, _ in spec.integrals] == ["H1", "H2"]
    H2 = spec.integral("H2")
    assert H2 == spec.element("w1^2*w2^2*x1^2/2 + (w1^2 + w2^2)*x2^2/2 - x3^2/2 + x2*x4")


def test_unknown_example():
    with pytest.raises(KeyError, match="euler_top"):
        load_example("unknown")


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_round_trip(name):
    spec = load_example(name)
    again = parse_system(format_system(spec))
    assert again == spec
    assert format_system(again) == format_system(spec)


def test_expression_round_trip():
    known = {n: "constant" for n in ("a", "b")}
    e = parse_expr("-(a + b)^2*a/2 - 3", known)
    assert parse_expr(format_expr(e), known) == e


def test_magnetic_text():
    _, r = solved("magnetic_particle")
    text = render_result(r).decode()
    assert "v_y v_x = v_x v_y + i*hbar*k" in text
    assert "free parameters: k" in text


def test_no_free_params_json():
    spec, r = solved("magnetic_particle")
    n = impose_heisenberg(r, spec.integral("H"))
    data = json.loads(render_result(n, "json"))
    assert data["free_params"] == []
    assert set(data) >= {
        "system", "hbar_order", "relations", "derivation", "integrals", "free_params",
        "constraints", "assumptions", "exact", "consistency_report",
    }


def test_euler_json_round_trip():
    spec, r = solved("euler_top")
    data = render_result(r, "json")
    back = load_result_json(data, spec)
    gt = r.gt
    for i in range(gt.n):
        for j in range(i + 1, gt.n):
            assert back["table"][(gt.names[i], gt.names[j])] == r.table.entry(i, j)
    assert back["derivation"] == r.derivation.images
    assert back["integrals"] == r.integrals
    assert back["free_params"] == list(r.free_params)
    assert back["constraints"] == r.constraint_strings()
    assert json.loads(data)["derivation"]["L1"]["terms"][1]["coefficient"] == "(-1/2)*i*hbar*a1*f1"


def test_json_is_deterministic():
    _, r = solved("pais_uhlenbeck")
    assert render_result(r, "json") == render_result(r, "json")


def test_element_string_round_trip():
    spec, r = solved("nonlinear_oscillator")
    for e in list(r.derivation.images.values()) + list(r.integrals.values()):
        assert element_from_string(element_string(e), spec) == e


def test_unknown_format():
    _, r = solved("magnetic_particle")
    with pytest.raises(ValueError):
        render_result(r, "yaml")


tokens = st.sampled_from(
    ["system", "constants", "generators", "evolution", "integrals", "options", "denominator",
     "labels", "parameters", "x", "y", "a", "'", "=", "+", "-", "*", "/", "^", "(", ")", "1",
     "2", "1/(", "[", "]", ",", "@", "i", "hbar", "K", "\n", "  ", "#", "%", "0.5"]
)


@given(st.lists(tokens, max_size=40).map(" ".join))
@settings(max_examples=300)
def test_fuzz_tokens(text):
    try:
        parse_system(text)
    except ParseError as exc:
        assert exc.line >= 1 and exc.col >= 1


@given(st.sampled_from(sorted(EXAMPLES)), st.data())
@settings(max_examples=300)
def test_fuzz_mutations(name, data):
    text = EXAMPLES[name]
    pos = data.draw(st.integers(0, len(text)))
    cut = data.draw(st.integers(0, 6))
    insert = data.draw(st.text(alphabet="xyzab01^*/()+-='\n @[],#", max_size=4))
    try:
        parse_system(text[:pos] + insert + text[pos + cut:])
    except ParseError as exc:
        assert exc.line >= 1 and exc.col >= 1
