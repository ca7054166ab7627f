import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gspinn import jets
from gspinn.errors import UsageError
from gspinn.fd import derivative
from gspinn.jets import Jet2, constant, jet_lift, nested_lift

reals = st.floats(-3.0, 3.0, allow_nan=False)


def test_lift_t_only():
    t, x, y = jet_lift((0.5, 0.2, 1.0), ("t",))
    assert t.value == 0.5 and t.d == {"t": 1.0}
    assert t.dd == {("t", "t"): 0.0}


def test_lift_passive_y():
    _, _, y = jet_lift((0.5, 0.2, 1.0), ("t", "x"))
    assert y.value == 1.0
    assert all(v == 0 for v in y.d.values())
    assert all(v == 0 for v in y.dd.values())


def test_square_of_x():
    _, x, _ = jet_lift((0.0, 2.0, 0.0), ("x",))
    sq = x * x
    assert (sq.value, sq.d["x"], sq.dd[("x", "x")]) == (4.0, 4.0, 2.0)


def test_tanh_at_zero():
    _, x, _ = jet_lift((0.0, 0.0, 0.0), ("x",))
    r = jets.tanh(x)
    assert (r.value, r.d["x"], r.dd[("x", "x")]) == (0.0, 1.0, 0.0)


def test_exp_at_zero():
    t, _, _ = jet_lift((0.0, 0.0, 0.0), ("t",))
    r = jets.exp(t)
    assert (r.value, r.d["t"], r.dd[("t", "t")]) == (1.0, 1.0, 1.0)


def test_cross_term():
    t, x, _ = jet_lift((0.3, 0.7, 0.0))
    assert (t * x).dd[("t", "x")] == 1.0
    assert (t * x).second("x", "t") == 1.0


def test_constant_has_no_derivatives():
    c = constant(2.5)
    assert c.value == 2.5
    assert all(v == 0 for v in c.d.values()) and all(v == 0 for v in c.dd.values())


def test_direction_mismatch():
    t, _, _ = jet_lift((0.3, 0.7, 0.0), ("t",))
    _, x, _ = jet_lift((0.3, 0.7, 0.0), ("t", "x"))
    with pytest.raises(UsageError):
        t + x
    with pytest.raises(UsageError):
        jet_lift((0.0, 0.0, 0.0), ("y",))


def test_scale_and_affine():
    _, x, _ = jet_lift((0.0, 1.5, 0.0), ("x",))
    a = jets.affine(x, 2.0, 1.0)
    assert (a.value, a.d["x"]) == (4.0, 2.0)
    assert jets.scale(x, -1.0).d["x"] == -1.0


PRIMITIVES = {
    "exp": (jets.exp, np.exp, np.exp, np.exp),
    "tanh": (
        jets.tanh,
        np.tanh,
        lambda v: 1 - np.tanh(v) ** 2,
        lambda v: -2 * np.tanh(v) * (1 - np.tanh(v) ** 2),
    ),
    "sinh": (jets.sinh, np.sinh, np.cosh, np.sinh),
    "cosh": (jets.cosh, np.cosh, np.sinh, np.cosh),
}


@pytest.mark.parametrize("name", sorted(PRIMITIVES))
def test_primitives_match_analytic(name, rng):
    f, f0, f1, f2 = PRIMITIVES[name]
    v = rng.uniform(-3, 3, 1000)
    _, x, _ = jet_lift((0.0, v, 0.0), ("x",))
    r = f(x)
    assert np.max(np.abs(r.value - f0(v))) <= 1e-12 * np.max(np.abs(f0(v)))
    assert np.max(np.abs(r.d["x"] - f1(v))) <= 1e-12 * max(1, np.max(np.abs(f1(v))))
    assert np.max(np.abs(r.dd[("x", "x")] - f2(v))) <= 1e-12 * max(1, np.max(np.abs(f2(v))))


def test_positive_domain_primitives(rng):
    v = rng.uniform(0.1, 3, 1000)
    _, x, _ = jet_lift((0.0, v, 0.0), ("x",))
    lg, sq, rc = jets.log(x), jets.sqrt(x), 1.0 / x
    assert np.allclose(lg.d["x"], 1 / v, rtol=1e-14) and np.allclose(lg.dd[("x", "x")], -1 / v**2, rtol=1e-14)
    assert np.allclose(sq.dd[("x", "x")], -0.25 * v**-1.5, rtol=1e-13)
    assert np.allclose(rc.dd[("x", "x")], 2 / v**3, rtol=1e-13)
    p = x**3.0
    assert np.allclose(p.dd[("x", "x")], 6 * v, rtol=1e-13)


def _composite(t, x):
    return jets.tanh(jets.exp(0.3 * t) * x - t / (1.5 + x * x)) * jets.cosh(0.5 * x)


@given(reals, reals)
def test_chain_rule_matches_finite_differences(tv, xv):
    t, x, _ = jet_lift((tv, xv, 0.0))
    r = _composite(t, x)
    checks = [
        (r.d["t"], derivative(lambda s: _composite(s, xv), tv)),
        (r.d["x"], derivative(lambda s: _composite(tv, s), xv)),
        (r.dd[("t", "t")], derivative(lambda s: _composite(s, xv), tv, order=2)),
        (r.dd[("x", "x")], derivative(lambda s: _composite(tv, s), xv, order=2)),
        (r.dd[("t", "x")], derivative(lambda s: derivative(lambda q: _composite(s, q), xv), tv)),
    ]
    for exact, approx in checks:
        assert abs(exact - approx) <= 1e-5 * max(1.0, abs(exact))


@given(reals, reals)
def test_second_order_table_is_symmetric(tv, xv):
    t, x, _ = jet_lift((tv, xv, 0.0))
    r = _composite(t, x)
    assert r.second("t", "x") == r.second("x", "t")


def test_nested_third_derivatives(rng):
    tv, xv = rng.uniform(0.1, 1, 20), rng.uniform(-1, 1, 20)
    T, X, _ = nested_lift(tv, xv, 0.0)
    U = jets.exp(T * X) * jets.tanh(X)
    uxx = jets.field(U, "u_xx")

    def f(t, x):
        return np.exp(t * x) * np.tanh(x)

    # nested differences amplify round-off, so both levels use wider steps
    fd_xxx = derivative(lambda s: derivative(lambda q: f(tv, q), s, 1e-3, order=2), xv, 1e-2)
    fd_xxt = derivative(lambda s: derivative(lambda q: f(s, q), xv, 1e-3, order=2), tv, 1e-2)
    assert np.allclose(uxx.d["x"], fd_xxx, rtol=1e-5, atol=1e-6)
    assert np.allclose(uxx.d["t"], fd_xxt, rtol=1e-5, atol=1e-6)


def test_field_requires_outer_jet():
    t, _, _ = jet_lift((0.1, 0.2, 0.0))
    with pytest.raises(UsageError):
        jets.field(t, "u")


def test_numpy_defers_to_jets():
    _, x, _ = jet_lift((0.0, np.array([1.0, 2.0]), 0.0), ("x",))
    r = np.array([2.0, 3.0]) * x
    assert isinstance(r, Jet2)
    assert np.array_equal(r.d["x"], [2.0, 3.0])
