"""Lie point symmetries of the kernel problems and their invariance tests.

Generators have the form ``tau d_t + xi d_x + phi u d_u`` with coefficients
depending on (t, x) and the source point y as a parameter.  Coefficient
functions are written with plain arithmetic and :mod:`gspinn.jets`
elementary functions so they accept floats, arrays and jets alike.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .errors import UsageError
from .jets import Jet2

GREEN_TOL = 1e-8
SUPPORT_PROBE = 1e-3


def _zero(t, x, y):
    return 0.0 * t + 0.0 * x


def _numeric_xi_x(xi):
    def xi_x(t, x, y):
        _, xj, _ = jets.jet_lift((t, x, y), ("x",))
        return xi(t, xj, y).d["x"]

    return xi_x


@dataclass(frozen=True)
class Generator:
    """Coefficients tau(t,x;y), xi(t,x;y), phi(t,x;y) plus d(xi)/dx."""

    tau: Callable
    xi: Callable
    phi: Callable
    xi_x: Callable | None = None
    label: str = ""

    def __post_init__(self):
        if self.xi_x is None:
            object.__setattr__(self, "xi_x", _numeric_xi_x(self.xi))

    def at(self, y):
        """The same generator with y frozen, in general (t, x, u) form."""
        return PointGenerator(
            tau=lambda t, x, u: self.tau(t, x, y) + 0.0 * u,
            xi=lambda t, x, u: self.xi(t, x, y) + 0.0 * u,
            eta=lambda t, x, u: self.phi(t, x, y) * u,
            xi_x=lambda t, x, u: self.xi_x(t, x, y) + 0.0 * u,
            label=self.label,
        )

    def __mul__(self, c):
        return combine([(c, self)], label=f"{c}*{self.label}")

    __rmul__ = __mul__

    def __add__(self, other):
        return combine([(1.0, self), (1.0, other)], label=f"{self.label}+{other.label}")


def _coef(c, y):
    return c(y) if callable(c) else c


def combine(terms, label=""):
    """Linear combination ``sum c_k * g_k``; ``c_k`` may be a number or a function of y."""
    terms = list(terms)

    def lin(attr):
        def f(t, x, y):
            out = 0.0 * t + 0.0 * x
            for c, g in terms:
                out = out + _coef(c, y) * getattr(g, attr)(t, x, y)
            return out

        return f

    return Generator(lin("tau"), lin("xi"), lin("phi"), lin("xi_x"), label)


@dataclass(frozen=True)
class PointGenerator:
    """General ``tau d_t + xi d_x + eta d_u`` with coefficients of (t, x, u)."""

    tau: Callable
    xi: Callable
    eta: Callable
    xi_x: Callable | None = None
    label: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    generator: Generator
    invariant: bool = False
    note: str = ""


# -- catalogs ----------------------------------------------------------------


def heat_catalog(n=1, kappa=0.5):
    """Point symmetries of u_t = kappa * Laplacian(u), written along one coordinate.

    For n > 1 the fields act diagonally on every coordinate, so ``xi_x``
    carries the divergence (n for x d_x).  ``invariant`` is the combination
    that also preserves the delta initial datum: 2t d_t + (x - y) d_x - n u d_u.
    """
    one = lambda t, x, y: 1.0 + _zero(t, x, y)
    dim = lambda t, x, y: float(n) + _zero(t, x, y)
    g = {
        "v0": Generator(one, _zero, _zero, _zero, "v0"),
        "v1": Generator(_zero, one, _zero, _zero, "v1"),
        "v2": Generator(lambda t, x, y: 2.0 * t + 0.0 * x, lambda t, x, y: x + 0.0 * t, _zero, dim, "v2"),
        "v3": Generator(_zero, _zero, one, _zero, "v3"),
        "v4": Generator(
            _zero,
            lambda t, x, y: 2.0 * kappa * t + 0.0 * x,
            lambda t, x, y: -x + 0.0 * t,
            _zero,
            "v4",
        ),
        "v5": Generator(
            lambda t, x, y: t * t + 0.0 * x,
            lambda t, x, y: t * x,
            lambda t, x, y: -(0.5 * n * t + x * x / (4.0 * kappa)),
            lambda t, x, y: n * t + 0.0 * x,
            "v5",
        ),
    }
    inv = combine([(1.0, g["v2"]), (-float(n), g["v3"]), (lambda y: -y, g["v1"])], "invariant")
    entries = [CatalogEntry(v) for v in g.values()]
    entries.append(CatalogEntry(inv, True, "v2 - n*v3 - y*v1"))
    return entries


def diffusion_catalog(b=0.5):
    """Point symmetries of u_t = x u_xx + b u_x; ``invariant`` is v3 + y*v0."""
    one = lambda t, x, y: 1.0 + _zero(t, x, y)
    g = {
        "v0": Generator(_zero, _zero, one, _zero, "v0"),
        "v1": Generator(one, _zero, _zero, _zero, "v1"),
        "v2": Generator(lambda t, x, y: t + 0.0 * x, lambda t, x, y: x + 0.0 * t, _zero, one, "v2"),
        "v3": Generator(
            lambda t, x, y: t * t + 0.0 * x,
            lambda t, x, y: 2.0 * t * x,
            lambda t, x, y: -(x + b * t),
            lambda t, x, y: 2.0 * t + 0.0 * x,
            "v3",
        ),
    }
    inv = combine([(1.0, g["v3"]), (lambda y: y, g["v0"])], "invariant")
    entries = [CatalogEntry(v) for v in g.values()]
    entries.append(CatalogEntry(inv, True, "v3 + y*v0"))
    return entries


# -- characteristic ----------------------------------------------------------


def characteristic_residual(gen, jet, points):
    """Q = phi*K - xi*K_x - tau*K_t at each point."""
    p = np.asarray(points, dtype=float)
    t, x, y = p[..., 0], p[..., 1], p[..., 2]
    return gen.phi(t, x, y) * jet.K - gen.xi(t, x, y) * jet.K_x - gen.tau(t, x, y) * jet.K_t


def characteristic_coefs(gen, points):
    """Q as channel coefficients, the form consumed by loss terms."""
    t, x, y = points[:, 0], points[:, 1], points[:, 2]
    return {
        "v": np.broadcast_to(gen.phi(t, x, y), t.shape).astype(float),
        "x": -np.broadcast_to(gen.xi(t, x, y), t.shape).astype(float),
        "t": -np.broadcast_to(gen.tau(t, x, y), t.shape).astype(float),
    }


# -- invariance conditions for the kernel problem ------------------------------


@dataclass
class InvarianceReport:
    cond_tau: float
    cond_phi_xi: float
    cond_xi_support: float
    tol: float = GREEN_TOL
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = max(self.cond_tau, self.cond_phi_xi, self.cond_xi_support) <= self.tol

    def lines(self):
        return [
            f"cond_tau        = {self.cond_tau:.3e}",
            f"cond_phi_xi     = {self.cond_phi_xi:.3e}",
            f"cond_xi_support = {self.cond_xi_support:.3e}",
            "PASS" if self.passed else "FAIL",
        ]


def check_green_invariance(gen, y_samples, x_samples=None, tol=GREEN_TOL):
    """Test the three conditions for invariance of the delta-source problem.

    tau(0, x; y) = 0 for all x, [phi + xi_x](0, y; y) = 0 and xi(0, y; y) = 0,
    each evaluated as a maximum over the sample grid.
    """
    y = np.asarray(y_samples, dtype=float).ravel()
    x = y if x_samples is None else np.asarray(x_samples, dtype=float).ravel()
    X, Y = np.meshgrid(x, y)
    zero = np.zeros_like(X)
    cond_tau = np.max(np.abs(gen.tau(zero, X, Y)))
    z = np.zeros_like(y)
    cond_phi_xi = np.max(np.abs(gen.phi(z, y, y) + gen.xi_x(z, y, y)))
    cond_xi = np.max(np.abs(gen.xi(z, y, y)))
    return InvarianceReport(float(cond_tau), float(cond_phi_xi), float(cond_xi), tol)


@dataclass
class CombinationResult:
    """Per-y coefficients of the free generators and the fit quality.

    ``affine_fit[k]`` is (intercept, slope) of coefficient k as a function of y.
    """

    coefficients: np.ndarray
    y: np.ndarray
    residual: float
    found: bool
    affine_fit: list
    message: str = ""


def _green_rows(gen, x, y):
    zx = np.zeros_like(x)
    tau = gen.tau(zx, x, y + zx)
    phi_xi = gen.phi(0.0, y, y) + gen.xi_x(0.0, y, y)
    xi = gen.xi(0.0, y, y)
    return np.concatenate([np.broadcast_to(tau, x.shape), [phi_xi, xi]]).astype(float)


def solve_generator_combination(basis, free_indices, y_samples, x_samples=None, tol=1e-10):
    """Find multipliers of the free basis elements making the sum invariant.

    Non-free basis elements enter with coefficient one.  For every y the
    invariance conditions are linear in the free multipliers and are solved
    by least squares; the result reports the worst residual over all y.
    """
    free = list(free_indices)
    if any(i < 0 or i >= len(basis) for i in free):
        raise UsageError("free index out of range")
    anchors = [i for i in range(len(basis)) if i not in free]
    y_all = np.asarray(y_samples, dtype=float).ravel()
    x = y_all if x_samples is None else np.asarray(x_samples, dtype=float).ravel()
    coefs = np.zeros((len(y_all), len(free)))
    worst = 0.0
    for k, y in enumerate(y_all):
        rhs = np.zeros(len(x) + 2)
        for i in anchors:
            rhs -= _green_rows(basis[i], x, y)
        if free:
            M = np.column_stack([_green_rows(basis[i], x, y) for i in free])
            c, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            res = np.linalg.norm(M @ c - rhs)
            coefs[k] = c
        else:
            res = np.linalg.norm(rhs)
        worst = max(worst, float(res))
    fits = []
    for j in range(len(free)):
        A = np.column_stack([np.ones_like(y_all), y_all])
        fits.append(tuple(np.linalg.lstsq(A, coefs[:, j], rcond=None)[0]))
    if not anchors:
        return CombinationResult(coefs, y_all, worst, False, fits,
                                 "no invariant combination: only the trivial zero generator")
    found = worst <= tol
    msg = "invariant combination found" if found else "no invariant combination"
    return CombinationResult(coefs, y_all, worst, found, fits, msg)


# -- Cauchy problems with general initial data --------------------------------


@dataclass(frozen=True)
class PointSupport:
    """Support {x = y} of a point source."""

    y: float

    def contains(self, x):
        return np.asarray(x) == self.y

    def distance(self, x):
        return np.abs(np.asarray(x, dtype=float) - self.y)


@dataclass(frozen=True)
class IntervalSupport:
    intervals: tuple

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return np.any([(x >= lo) & (x <= hi) for lo, hi in self.intervals], axis=0)

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        d = [np.maximum(np.maximum(lo - x, x - hi), 0.0) for lo, hi in self.intervals]
        return np.min(d, axis=0)


@dataclass
class CauchyReport:
    cond_tau: float
    cond_eta: float
    support_defect: float
    tol: float
    support_tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = (
            self.cond_tau <= self.tol
            and self.cond_eta <= self.tol
            and self.support_defect <= self.support_tol
        )


def check_cauchy_invariance(gen, f, support, samples, a=SUPPORT_PROBE, tol=GREEN_TOL):
    """Invariance of the problem with initial datum ``f`` under a general generator.

    ``gen`` is a :class:`PointGenerator`.  For a point support ``f`` may be
    None: the datum is then a unit point mass and the amplitude condition is
    evaluated at the support with u = 1.  Support invariance is probed by
    moving support samples by ``a * xi`` and measuring the distance back to
    the support, accepted up to ``10 a^2``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise UsageError("check_cauchy_invariance needs at least one sample")
    if isinstance(support, PointSupport):
        xs = np.array([support.y])
        us = np.ones(1)
        x_all, u_all = xs, us
    else:
        if f is None:
            raise UsageError("an evaluable initial datum is required for interval supports")
        x_all = x
        u_all = np.asarray(f(x), dtype=float)
        inside = support.contains(x)
        xs, us = x[inside], u_all[inside]
    probes = np.concatenate([u_all, [-1.0, 0.0, 1.0]])
    XX, UU = np.meshgrid(x_all, probes)
    zero = np.zeros_like(XX)
    cond_tau = float(np.max(np.abs(gen.tau(zero, XX, UU))))
    z = np.zeros_like(x_all)
    xi_x = gen.xi_x if gen.xi_x is not None else _numeric_point_xi_x(gen.xi)
    cond_eta = float(np.max(np.abs(gen.eta(z, x_all, u_all) + xi_x(z, x_all, u_all) * u_all)))
    if xs.size:
        moved = xs + a * gen.xi(np.zeros_like(xs), xs, us)
        defect = float(np.max(support.distance(moved)))
    else:
        defect = 0.0
    return CauchyReport(cond_tau, cond_eta, defect, tol, 10.0 * a * a)


def _numeric_point_xi_x(xi):
    def xi_x(t, x, u):
        _, xj, _ = jets.jet_lift((t, x, 0.0), ("x",))
        return xi(t, xj, u).d["x"]

    return xi_x


# -- infinitesimal transformation of densities -------------------------------


def _derivative(fn, x):
    _, xj, _ = jets.jet_lift((0.0, x, 0.0), ("x",))
    out = fn(xj)
    return out.d["x"] if isinstance(out, Jet2) else 0.0 * x


def _invert(xi, a, s, iters=60):
    """Solve x + a*xi(x) = s by Newton's method (vectorised)."""
    x = s - a * np.asarray(xi(s), dtype=float)
    for _ in range(iters):
        _, xj, _ = jets.jet_lift((0.0, x, 0.0), ("x",))
        m = xj + a * xi(xj)
        step = (m.value - s) / m.d["x"]
        x = x - step
        if np.max(np.abs(step)) <= 1e-16 * (1.0 + np.max(np.abs(x))):
            break
    return x


def pushforward_check(f, xi, a, samples, xi_prime=None, h=1e-5):
    """Max gap between the exact pushforward of a density and its first-order form.

    The map is x -> x + a*xi(x).  The exact transformed density at a point s
    is f(x) * d(x)/ds with x the preimage of s (Newton inversion, Jacobian of
    the inverse by central differences); the first-order form is
    f(x) - a * xi'(x) * f(x).  The gap is O(a^2).
    """
    s = np.asarray(samples, dtype=float).ravel()
    if a == 0:
        return 0.0
    if not 0 < abs(a) <= 1e-2:
        raise UsageError(f"probe parameter must satisfy 0 < |a| <= 1e-2, got {a}")
    dxi = xi_prime if xi_prime is not None else (lambda v: _derivative(xi, v))
    x = _invert(xi, a, s)
    if np.any(1.0 + a * np.asarray(dxi(x)) <= 0):
        raise UsageError("map x + a*xi(x) is not invertible on the samples")
    jac = (_invert(xi, a, s + h) - _invert(xi, a, s - h)) / (2.0 * h)
    exact = f(x) * jac
    first = f(x) - a * dxi(x) * f(x)
    return float(np.max(np.abs(exact - first)))


# -- linearized symmetry condition --------------------------------------------


@dataclass
class LscResult:
    max_abs: float
    prolongation: dict


def prolong(gen, solution, t, x, y=0.0):
    """Second prolongation coefficients of ``gen`` evaluated along ``solution``.

    ``gen`` is a :class:`PointGenerator` (coefficients of t, x, u) or a
    :class:`Generator` (frozen at ``y``).  Uses eta^J = D_J Q + xi u_{Jx} +
    tau u_{Jt} with Q = eta - xi u_x - tau u_t, where the total derivatives
    are taken along the solution via nested jets.
    """
    if isinstance(gen, Generator):
        gen = gen.at(y)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    T, X, Y = jets.nested_lift(t, x, y)
    U = solution(T, X, Y)
    u = jets.field(U, "u")
    ut = jets.field(U, "u_t")
    ux = jets.field(U, "u_x")
    uxx = jets.field(U, "u_xx")
    tj, xj, _ = jets.jet_lift((t, x, y), ("t", "x"))
    tau = gen.tau(tj, xj, u)
    xi = gen.xi(tj, xj, u)
    Q = gen.eta(tj, xj, u) - xi * ux - tau * ut
    xv, tv = jets.value_of(xi), jets.value_of(tau)
    u_tt = ut.d["t"]
    u_tx = ux.d["t"]
    u_xxx = uxx.d["x"]
    u_xxt = uxx.d["t"]
    return {
        "tau": tv,
        "xi": xv,
        "eta": Q.value + xv * ux.value + tv * ut.value,
        "eta_t": Q.d["t"] + xv * u_tx + tv * u_tt,
        "eta_x": Q.d["x"] + xv * uxx.value + tv * u_tx,
        "eta_xx": Q.dd[("x", "x")] + xv * u_xxx + tv * u_xxt,
        "fields": {"u": u.value, "u_t": ut.value, "u_x": ux.value, "u_xx": uxx.value},
    }


def lsc_verify(problem, gen, solution, t, x, y=0.0, pde_tol=1e-8):
    """Max |pr X (A)| over samples, A the problem's defining function.

    The solution is first checked to satisfy the PDE; failing that raises
    :class:`UsageError` naming the worst residual.
    """
    pr = prolong(gen, solution, t, x, y)
    f = pr["fields"]
    A = problem.defining_function(x, f)
    worst = float(np.max(np.abs(A)))
    if worst > pde_tol:
        raise UsageError(f"solution does not satisfy the PDE: max residual {worst:.3e}")
    dA = problem.defining_partials(x, f)
    XA = (
        pr["xi"] * dA["x"]
        + pr["tau"] * dA["t"]
        + pr["eta"] * dA["u"]
        + pr["eta_t"] * dA["u_t"]
        + pr["eta_x"] * dA["u_x"]
        + pr["eta_xx"] * dA["u_xx"]
    )
    return LscResult(float(np.max(np.abs(XA))), pr)
