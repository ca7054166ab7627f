import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gspinn import jets
from gspinn.fd import derivative
from gspinn.errors import UsageError
from gspinn.problems import diffusion_problem, heat_kernel_exact, heat_problem, kernel_jet
from gspinn.symmetry import (
    Generator,
    IntervalSupport,
    PointGenerator,
    PointSupport,
    characteristic_residual,
    check_cauchy_invariance,
    check_green_invariance,
    combine,
    lsc_verify,
    prolong,
    pushforward_check,
    solve_generator_combination,
)

HEAT = heat_problem()
DIFF = diffusion_problem()
Y_HEAT = np.linspace(-2, 2, 64)
Y_DIFF = np.linspace(0.05, 2, 64)
zero = lambda t, x, y: 0.0 * t + 0.0 * x
ZERO_GEN = Generator(zero, zero, zero, zero, "zero")


def gen(problem, label):
    return problem.generator(label)


# -- characteristic ----------------------------------------------------------


def test_heat_characteristic_on_exact_kernel():
    pt = np.array([[0.7, 0.4, -0.2]])
    j = kernel_jet(HEAT.exact, *pt.T)
    assert abs(characteristic_residual(HEAT.invariant_generator, j, pt)[0]) <= 1e-10


def test_heat_invariant_coefficients():
    g = HEAT.invariant_generator
    t, x, y = 0.3, 0.9, -0.4
    assert g.tau(t, x, y) == pytest.approx(2 * t)
    assert g.xi(t, x, y) == pytest.approx(x - y)
    assert g.phi(t, x, y) == pytest.approx(-1.0)


def test_diffusion_characteristic_on_exact_kernel():
    pt = np.array([[0.5, 1.2, 0.8]])
    j = kernel_jet(DIFF.exact, *pt.T)
    g = DIFF.invariant_generator
    t, x, y = pt[0]
    assert g.phi(t, x, y) == pytest.approx(-(x - y + t / 2))
    assert abs(characteristic_residual(g, j, pt)[0]) <= 1e-8


def test_zero_generator_characteristic(rng):
    pts = rng.uniform(0.1, 1, (20, 3))
    j = kernel_jet(HEAT.exact, *pts.T)
    assert np.all(characteristic_residual(ZERO_GEN, j, pts) == 0.0)


def test_invariant_characteristic_vanishes_on_grid(rng):
    n = 10_000
    pts = np.column_stack([rng.uniform(0.01, 1, n), rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)])
    q = characteristic_residual(HEAT.invariant_generator, kernel_jet(HEAT.exact, *pts.T), pts)
    assert np.max(np.abs(q)) <= 1e-6
    pts = np.column_stack([rng.uniform(0.05, 1, n), rng.uniform(0.05, 2, n), rng.uniform(0.05, 2, n)])
    q = characteristic_residual(DIFF.invariant_generator, kernel_jet(DIFF.exact, *pts.T), pts)
    assert np.max(np.abs(q)) <= 1e-5


@pytest.mark.parametrize("problem", [HEAT, DIFF], ids=["heat", "diffusion"])
def test_xi_x_matches_differences(problem, rng):
    t, x, y = rng.uniform(0.1, 1, 30), rng.uniform(0.1, 2, 30), rng.uniform(0.1, 2, 30)
    for entry in problem.catalog:
        g = entry.generator
        fd = derivative(lambda s: g.xi(t, s, y), x)
        assert np.allclose(g.xi_x(t, x, y), fd, rtol=1e-6, atol=1e-9)


# -- Green-function invariance --------------------------------------------------


def test_green_invariance_heat():
    assert check_green_invariance(HEAT.invariant_generator, Y_HEAT).passed
    r = check_green_invariance(gen(HEAT, "v2"), Y_HEAT)
    assert not r.passed and r.cond_phi_xi == 1.0
    assert not check_green_invariance(gen(HEAT, "v3"), Y_HEAT).passed


def test_green_invariance_diffusion():
    assert check_green_invariance(DIFF.invariant_generator, Y_DIFF).passed
    for label in ("v0", "v3"):
        assert not check_green_invariance(gen(DIFF, label), Y_DIFF).passed
    v3_only = combine([(1.0, gen(DIFF, "v3")), (0.0, gen(DIFF, "v0"))])
    r = check_green_invariance(v3_only, [0.5])
    assert r.cond_phi_xi == pytest.approx(0.5) and not r.passed


@given(st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3))
def test_green_invariance_scale_invariant(c):
    for problem, ys in ((HEAT, Y_HEAT), (DIFF, Y_DIFF)):
        for entry in problem.catalog:
            g = entry.generator
            assert check_green_invariance(c * g, ys).passed == check_green_invariance(g, ys).passed


def test_report_lines():
    lines = check_green_invariance(gen(HEAT, "v2"), Y_HEAT).lines()
    assert lines[-1] == "FAIL" and lines[1].startswith("cond_phi_xi")


# -- coefficient solver ---------------------------------------------------------


def test_solve_heat_combination():
    basis = [gen(HEAT, "v2"), gen(HEAT, "v3"), gen(HEAT, "v1")]
    res = solve_generator_combination(basis, [1, 2], Y_HEAT)
    assert res.found and res.residual <= 1e-12
    assert np.allclose(res.coefficients[:, 0], -1.0, atol=1e-12)
    assert np.allclose(res.coefficients[:, 1], -Y_HEAT, atol=1e-12)
    (c0, c1), (d0, d1) = res.affine_fit
    assert (c0, c1) == pytest.approx((-1.0, 0.0), abs=1e-12)
    assert (d0, d1) == pytest.approx((0.0, -1.0), abs=1e-12)


def test_solve_heat_combination_n2():
    h2 = heat_problem(n=2)
    basis = [gen(h2, "v2"), gen(h2, "v3"), gen(h2, "v1")]
    res = solve_generator_combination(basis, [1, 2], Y_HEAT)
    assert res.found
    assert np.allclose(res.coefficients[:, 0], -2.0, atol=1e-12)
    assert check_green_invariance(h2.invariant_generator, Y_HEAT).passed
    assert check_green_invariance(gen(h2, "v2"), Y_HEAT).cond_phi_xi == 2.0


def test_solve_diffusion_combination():
    res = solve_generator_combination([gen(DIFF, "v3"), gen(DIFF, "v0")], [1], Y_DIFF)
    assert res.found and res.residual <= 1e-12
    assert np.allclose(res.coefficients[:, 0], Y_DIFF, atol=1e-12)


def test_time_translation_alone_has_no_solution():
    res = solve_generator_combination([gen(HEAT, "v0")], [], Y_HEAT)
    assert not res.found
    res = solve_generator_combination([gen(HEAT, "v0")], [0], Y_HEAT)
    assert not res.found
    with pytest.raises(UsageError):
        solve_generator_combination([gen(HEAT, "v0")], [3], Y_HEAT)


# -- Cauchy invariance ------------------------------------------------------------


def test_cauchy_point_source_heat():
    g = HEAT.invariant_generator.at(0.4)
    assert check_cauchy_invariance(g, None, PointSupport(0.4), Y_HEAT).passed


def test_cauchy_raw_scaling_fails():
    raw = gen(HEAT, "v2").at(0.0)
    r = check_cauchy_invariance(raw, None, PointSupport(0.0), Y_HEAT)
    assert r.cond_eta == pytest.approx(1.0) and not r.passed


def test_cauchy_time_translation_fails():
    r = check_cauchy_invariance(gen(HEAT, "v0").at(0.0), None, PointSupport(0.0), Y_HEAT)
    assert r.cond_tau == 1.0 and not r.passed


def test_cauchy_interval_support():
    # f = 1 on [-1, 1]; u d_u scaling of a constant profile is not invariant,
    # translation along x moves the support
    f = lambda x: np.where(np.abs(x) <= 1, 1.0, 0.0)
    sup = IntervalSupport(((-1.0, 1.0),))
    xs = np.linspace(-2, 2, 41)
    assert not check_cauchy_invariance(gen(HEAT, "v3").at(0.0), f, sup, xs).passed
    r = check_cauchy_invariance(gen(HEAT, "v1").at(0.0), f, sup, xs)
    assert r.cond_tau == 0 and r.cond_eta == 0 and r.support_defect > r.support_tol


def test_cauchy_empty_samples():
    with pytest.raises(UsageError):
        check_cauchy_invariance(HEAT.invariant_generator.at(0.0), None, PointSupport(0.0), [])


# -- pushforward ---------------------------------------------------------------------


gauss = lambda x: np.exp(-x * x / 2) / np.sqrt(2 * np.pi)
SAMPLES = np.linspace(-3, 3, 61)


def test_pushforward_linear_field():
    d1 = pushforward_check(gauss, lambda x: x, 1e-3, SAMPLES)
    d2 = pushforward_check(gauss, lambda x: x, 5e-4, SAMPLES)
    assert d1 / d2 >= 3.5


def test_pushforward_translation():
    # unit Jacobian: compared at corresponding points the first-order form is exact
    assert pushforward_check(gauss, lambda x: 0.7 + 0.0 * x, 1e-3, SAMPLES) <= 1e-10


def test_pushforward_identity_and_errors():
    assert pushforward_check(gauss, lambda x: x, 0.0, SAMPLES) == 0.0
    with pytest.raises(UsageError):
        pushforward_check(gauss, lambda x: x, 0.5, SAMPLES)
    with pytest.raises(UsageError):
        pushforward_check(gauss, lambda x: -200.0 * x, 1e-2, SAMPLES)


@given(st.floats(0.2, 1.5), st.floats(-1, 1), st.floats(0.2, 2))
def test_pushforward_second_order(width, shift, amp):
    f = lambda x: np.exp(-((x - shift) ** 2) / (2 * width**2))
    xi = lambda x: amp * jets.tanh(x) + 0.3
    d1 = pushforward_check(f, xi, 1e-3, SAMPLES)
    d4 = pushforward_check(f, xi, 2.5e-4, SAMPLES)
    assert d1 / d4 >= 12


# -- linearized symmetry condition -------------------------------------------------


def test_lsc_heat_scaling():
    rng = np.random.default_rng(0)
    t, x = rng.uniform(0.1, 1, 200), rng.uniform(-2, 2, 200)
    sol = lambda T, X, Y: heat_kernel_exact(T, X, Y)
    assert lsc_verify(HEAT, gen(HEAT, "v2"), sol, t, x, 0.0).max_abs <= 1e-6


@pytest.mark.parametrize("problem", [HEAT, heat_problem(kappa=1.0), DIFF], ids=["heat", "heat-k1", "diffusion"])
def test_lsc_all_catalog_generators(problem):
    rng = np.random.default_rng(1)
    d = problem.domain
    t, x = rng.uniform(0.1, 1, 200), rng.uniform(max(d.x_lo, 0.1), d.x_hi, 200)
    for entry in problem.catalog:
        assert lsc_verify(problem, entry.generator, problem.exact, t, x, 0.7).max_abs <= 1e-6


def test_lsc_zero_generator():
    t, x = np.array([0.3, 0.6]), np.array([0.1, -0.5])
    assert lsc_verify(HEAT, ZERO_GEN, HEAT.exact, t, x).max_abs == 0.0


def test_lsc_rejects_non_solution():
    t, x = np.array([0.3, 0.6]), np.array([0.1, -0.5])
    with pytest.raises(UsageError, match="max residual"):
        lsc_verify(HEAT, gen(HEAT, "v2"), lambda T, X, Y: X * X + 0.0 * T, t, x)


def test_prolongation_worked_example():
    rot = PointGenerator(tau=lambda t, x, u: 0.0 * u, xi=lambda t, x, u: -u, eta=lambda t, x, u: x + 0.0 * u)
    t, x = np.array([0.3, 0.5]), np.array([1.0, 2.0])
    pr = prolong(rot, lambda T, X, Y: X + 0.0 * T, t, x)
    assert np.allclose(pr["eta_x"], 2.0) and np.allclose(pr["eta_xx"], 0.0)
    pr = prolong(rot, lambda T, X, Y: X * X + 0.0 * T, t, x)
    # 1 + u_x^2 and 3 u_x u_xx for u = x^2
    assert np.allclose(pr["eta_x"], 1 + 4 * x * x) and np.allclose(pr["eta_xx"], 12 * x)


def test_prolongation_against_differences():
    # eta^x of heat v5 along the kernel vs total derivative by differences
    g = gen(HEAT, "v5").at(0.3)
    t, x = np.array([0.4]), np.array([0.2])
    pr = prolong(g, HEAT.exact, t, x, 0.3)

    def Q(xx):
        j = kernel_jet(HEAT.exact, t, xx, 0.3)
        return g.eta(t, xx, j.K) - g.xi(t, xx, j.K) * j.K_x - g.tau(t, xx, j.K) * j.K_t

    j = kernel_jet(HEAT.exact, t, x, 0.3)
    expect = derivative(Q, x) + g.xi(t, x, 0) * j.K_xx + g.tau(t, x, 0) * j.K_tx
    assert np.allclose(pr["eta_x"], expect, rtol=1e-7)
