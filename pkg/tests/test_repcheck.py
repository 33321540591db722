import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncquant.repcheck import (
    MatrixRep,
    RepError,
    RepReport,
    builtin_rep,
    check_representation,
    evaluate_element,
    load_rep,
)
from ncquant.solver import impose_heisenberg

from helpers import solved

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# Euler values with a . f = 0 and b x f = a
EULER_VALUES = {"f1": 1, "f2": 1, "f3": 1, "a1": 1, "a2": -1, "a3": 0, "b1": 1, "b2": 1, "b3": 0}


def magnetic_values(hbar=1.0):
    q, B, c, m = 1.0, 2.0, 1.0, 1.0
    return {"q": q, "B": B, "c": c, "m": m, "hbar": hbar, "k": -q * B / (c * m * m)}


def test_spin_half_is_pauli():
    rep = builtin_rep("spin", 2, {"hbar": 0.5})
    for name, s in zip(("J1", "J2", "J3"), PAULI):
        assert np.allclose(rep.generators[name], 0.25 * s)


def test_spin_one_dimensional_is_zero():
    rep = builtin_rep("spin", 1)
    assert all(not m.any() for m in rep.generators.values())


@pytest.mark.parametrize("dim", [2, 3, 5, 16])
def test_spin_commutators(dim):
    rep = builtin_rep("spin", dim, {"hbar": 0.7})
    j1, j2, j3 = (rep.generators[n] for n in ("J1", "J2", "J3"))
    assert np.max(np.abs(j1 @ j2 - j2 @ j1 - 1j * 0.7 * j3)) < 1e-12


@pytest.mark.parametrize("scale", [1.0, 2.5, -0.4])
def test_ladder_interior_commutator(scale):
    rep = builtin_rep("truncated_ladder_pair", 10, {"hbar": 1.3}, scale=scale)
    A, B = rep.generators["A"], rep.generators["B"]
    c = (A @ B - B @ A)[:9, :9]
    assert np.max(np.abs(c - 1j * 1.3 * scale * np.eye(9))) < 1e-12


def test_ladder_top_level_is_broken():
    rep = builtin_rep("truncated_ladder_pair", 10)
    A, B = rep.generators["A"], rep.generators["B"]
    assert abs((A @ B - B @ A)[9, 9] - 1j) > 1


def test_euler_spin_half():
    _, r = solved("euler_top")
    rep = builtin_rep("spin", 2, EULER_VALUES, generators=("L1", "L2", "L3"))
    report = check_representation(r, rep, tol=1e-12)
    assert report.passed, report.lines()
    assert any(k.startswith("relation") for k in report.residuals)


def test_magnetic_ladder():
    _, r = solved("magnetic_particle")
    vals = magnetic_values()
    rep = builtin_rep("truncated_ladder_pair", 20, vals, generators=("v_x", "v_y"),
                      scale=-vals["k"], edge_margin=2)
    report = check_representation(r, rep, tol=1e-10)
    assert report.passed, report.lines()
    assert report.interior == 18
    assert report.residuals["relation v_y v_x"] < 1e-10


def test_margin_matters():
    _, r = solved("magnetic_particle")
    vals = magnetic_values()
    rep = builtin_rep("truncated_ladder_pair", 20, vals, generators=("v_x", "v_y"), scale=-vals["k"])
    assert not check_representation(r, rep).passed


def test_zero_matrices_commutative():
    _, r = solved("magnetic_particle")
    z = np.zeros((3, 3))
    rep = MatrixRep({"v_x": z, "v_y": z}, {"q": 1, "B": 1, "c": 1, "m": 1, "k": 0})
    assert check_representation(r, rep).passed


def test_dimension_mismatch():
    with pytest.raises(RepError, match="dimension"):
        MatrixRep({"a": np.eye(2), "b": np.eye(3)}, {})
    with pytest.raises(RepError, match="square"):
        MatrixRep({"a": np.ones((2, 3))}, {})


def test_unassigned_parameter():
    _, r = solved("magnetic_particle")
    rep = builtin_rep("truncated_ladder_pair", 6, {"q": 1, "B": 1, "c": 1, "m": 1},
                      generators=("v_x", "v_y"))
    with pytest.raises(RepError, match="k"):
        check_representation(r, rep)


def test_missing_generator_matrix():
    _, r = solved("magnetic_particle")
    rep = builtin_rep("truncated_ladder_pair", 6, magnetic_values())
    with pytest.raises(RepError, match="v_x"):
        check_representation(r, rep)


def test_unknown_builtin():
    with pytest.raises(RepError, match="unknown"):
        builtin_rep("fock", 4)
    with pytest.raises(RepError):
        builtin_rep("spin", 0)
    with pytest.raises(RepError):
        builtin_rep("truncated_ladder_pair", 1)


def test_violated_constraint_is_reported():
    _, r = solved("euler_top")
    vals = dict(EULER_VALUES, a3=1)
    rep = builtin_rep("spin", 2, vals, generators=("L1", "L2", "L3"))
    report = check_representation(r, rep)
    assert report.failures == ["constraint a1*f1 + a2*f2 + a3*f3 = 0"]


def test_load_rep_json(tmp_path):
    rep = builtin_rep("spin", 2, EULER_VALUES, generators=("L1", "L2", "L3"))
    data = {
        "dimension": 2,
        "generators": {
            n: [[[z.real, z.imag] for z in row] for row in m] for n, m in rep.generators.items()
        },
        "values": EULER_VALUES,
    }
    path = tmp_path / "rep.json"
    path.write_text(json.dumps(data))
    loaded = load_rep(path)
    for n, m in rep.generators.items():
        assert np.array_equal(loaded.generators[n], m)
    _, r = solved("euler_top")
    assert check_representation(r, loaded, tol=1e-12).passed


def test_load_rep_errors(tmp_path):
    with pytest.raises(RepError, match="cannot read"):
        load_rep(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(RepError, match="invalid JSON"):
        load_rep(bad)
    with pytest.raises(RepError, match="shape"):
        load_rep({"dimension": 2, "generators": {"a": [[[0, 0]]]}})
    with pytest.raises(RepError, match="malformed"):
        load_rep({"generators": {}})


def test_evaluate_denominator():
    spec, r = solved("nonlinear_oscillator")
    x = np.diag([0.5, -1.0, 2.0]).astype(complex)
    rep = MatrixRep({"x": x, "y": np.zeros((3, 3))}, {"lam": 0.3, "omega": 1.0})
    got = evaluate_element(spec.element("d*x"), rep)
    assert np.allclose(got, x @ np.linalg.inv(np.eye(3) + 0.3 * x @ x))


def test_report_json():
    rep = RepReport({"a": 1e-3, "b": 0.0}, 1e-2, 4)
    assert rep.to_json()["passed"]
    assert rep.lines()[0].startswith("ok")
    assert RepReport({"a": 1e-3}, 1e-4, 4).to_json()["failures"] == ["a"]


# property: every built-in example that has a compatible built-in representation,
# after imposing the Heisenberg form, at dimension >= 16


def _euler_heisenberg(dim):
    spec, r = solved("euler_top")
    n = impose_heisenberg(r, spec.integral("H"))
    return n, builtin_rep("spin", dim, EULER_VALUES, generators=("L1", "L2", "L3"))


def _magnetic_heisenberg(dim):
    spec, r = solved("magnetic_particle")
    n = impose_heisenberg(r, spec.integral("H"))
    vals = magnetic_values()
    vals.pop("k")
    rep = builtin_rep("truncated_ladder_pair", dim, vals, generators=("v_x", "v_y"),
                      scale=2.0, edge_margin=2)
    return n, rep


def _canonical_heisenberg(dim):
    spec, r = solved("canonical_oscillator")
    n = impose_heisenberg(r.specialize({"s": 1}), spec.integral("H"))
    rep = builtin_rep("truncated_ladder_pair", dim, {"omega": 1.5}, generators=("x", "p"),
                      edge_margin=2)
    return n, rep


@pytest.mark.parametrize("build", [_euler_heisenberg, _magnetic_heisenberg, _canonical_heisenberg])
@pytest.mark.parametrize("dim", [16, 24])
def test_examples_in_representations(build, dim):
    result, rep = build(dim)
    report = check_representation(result, rep, tol=1e-10)
    assert report.passed, report.lines()
    assert any(k.startswith("heisenberg") for k in report.residuals)
    assert all(v >= 0 for v in report.residuals.values())


residual_maps = st.dictionaries(
    st.text("abc", min_size=1, max_size=3), st.floats(0, 1, allow_nan=False), max_size=6
)


@given(residual_maps, st.floats(1e-16, 1), st.floats(1e-16, 1))
def test_report_monotone_in_tol(res, t1, t2):
    lo, hi = sorted((t1, t2))
    if RepReport(res, lo, 1).passed:
        assert RepReport(res, hi, 1).passed
    assert set(RepReport(res, hi, 1).failures) <= set(RepReport(res, lo, 1).failures)


@given(st.floats(-2, 2), st.floats(0.1, 2), st.integers(2, 8))
def test_residuals_nonnegative(k, hbar, dim):
    _, r = solved("magnetic_particle")
    vals = dict(magnetic_values(hbar), k=k)
    rep = builtin_rep("truncated_ladder_pair", dim, vals, generators=("v_x", "v_y"), scale=1.0)
    assert all(v >= 0 for v in check_representation(r, rep).residuals.values())
