"""Kernel problems: PDE residuals, closed-form kernels and integral identities."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import jets
from .autodiff import KernelJet
from .errors import DomainError, UsageError
from .symmetry import CatalogEntry, diffusion_catalog, heat_catalog

HEAT_WINDOW = (-8.0, 8.0)


# -- closed forms --------------------------------------------------------------


def heat_kernel_exact(t, x, y, n=1, kappa=0.5):
    """(4 pi kappa t)^(-n/2) exp(-|x - y|^2 / (4 kappa t)); kappa = 1/2 by default.

    For n > 1, ``x`` and ``y`` carry the coordinates along their last axis.
    Accepts jets for n = 1.
    """
    if np.any(jets.value_of(t) <= 0):
        raise DomainError("heat kernel requires t > 0")
    if n == 1:
        r2 = (x - y) * (x - y)
    else:
        xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if xa.shape[-1:] != (n,) or ya.shape[-1:] != (n,):
            raise UsageError(f"expected {n} spatial coordinates on the last axis")
        d = xa - ya
        r2 = np.sum(d * d, axis=-1)
    return (4.0 * np.pi * kappa * t) ** (-0.5 * n) * jets.exp(-r2 / (4.0 * kappa * t))


def diffusion_kernel_exact(t, x, y):
    """(pi t y)^(-1/2) exp(-(x + y)/t) cosh(2 sqrt(xy)/t).

    Evaluated as half the sum of exp(-(sqrt x -/+ sqrt y)^2 / t), which never
    forms the overflowing cosh factor.
    """
    tv, xv, yv = jets.value_of(t), jets.value_of(x), jets.value_of(y)
    if np.any(tv <= 0) or np.any(xv < 0) or np.any(yv <= 0):
        raise DomainError("diffusion kernel requires t > 0, x >= 0, y > 0")
    sx, sy = jets.sqrt(x), jets.sqrt(y)
    near = jets.exp(-(sx - sy) * (sx - sy) / t)
    far = jets.exp(-(sx + sy) * (sx + sy) / t)
    return 0.5 * (near + far) / jets.sqrt(np.pi * t * y)


def kernel_jet(kernel, t, x, y):
    """Exact K, K_t, K_x, K_xx, K_tt, K_tx of a jet-compatible closed form."""
    tj, xj, yv = jets.jet_lift((np.asarray(t, float), np.asarray(x, float), y), ("t", "x"))
    K = kernel(tj, xj, jets.value_of(yv))
    return KernelJet(
        K=K.value,
        K_t=K.d["t"],
        K_x=K.d["x"],
        K_xx=K.dd[("x", "x")],
        K_tt=K.dd[("t", "t")],
        K_tx=K.dd[("t", "x")],
    )


# -- residuals -------------------------------------------------------------------


def heat_residual(jet, n=1, kappa=0.5):
    """K_t - kappa * sum_i K_{x_i x_i} (K_xx carries n coordinates on its last axis when n > 1)."""
    lap = jet.K_xx if n == 1 else np.sum(jet.K_xx, axis=-1)
    return jet.K_t - kappa * lap


def diffusion_residual(jet, x, b=0.5):
    """K_t - x K_xx - b K_x."""
    if np.any(np.asarray(x) <= 0):
        raise DomainError("diffusion residual requires x > 0")
    return jet.K_t - x * jet.K_xx - b * jet.K_x


# -- quadrature ------------------------------------------------------------------


@lru_cache(maxsize=32)
def _leggauss(nodes):
    return np.polynomial.legendre.leggauss(nodes)


def gauss_legendre(nodes, lo, hi):
    """Nodes and weights of the ``nodes``-point Gauss-Legendre rule on [lo, hi]."""
    z, w = _leggauss(int(nodes))
    half = 0.5 * (hi - lo)
    return lo + half * (z + 1.0), half * w


def compose_kernel(kernel, t1, t2, x, y, nodes=200, window=HEAT_WINDOW):
    """int K(t1, x, z) K(t2, z, y) dz over ``window`` by Gauss-Legendre."""
    if t1 <= 0 or t2 <= 0:
        raise DomainError("compose_kernel requires t1 > 0 and t2 > 0")
    z, w = gauss_legendre(nodes, *window)
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]
    return np.sum(kernel(t1, x, z) * kernel(t2, z, y) * w, axis=-1)


def cauchy_solve(kernel, u0, t, x, nodes=200, window=HEAT_WINDOW):
    """u(t, x) = int K(t, x, y) u0(y) dy over ``window``."""
    if t <= 0:
        raise DomainError("cauchy_solve requires t > 0")
    yq, w = gauss_legendre(nodes, *window)
    x = np.asarray(x, dtype=float)[..., None]
    return np.sum(kernel(t, x, yq) * u0(yq) * w, axis=-1)


# -- problem definitions -----------------------------------------------------


@dataclass(frozen=True)
class Domain:
    """Box t in (t_floor, t_max], x and y in [x_lo, x_hi]."""

    t_max: float
    x_lo: float
    x_hi: float
    t_floor: float = 0.0

    def __post_init__(self):
        if not (self.t_max > self.t_floor >= 0 and self.x_hi > self.x_lo):
            raise UsageError(f"degenerate domain box {self}")


@dataclass(frozen=True)
class PdeProblem:
    name: str
    domain: Domain
    n: int = 1
    kappa: float = 0.5
    b: float = 0.5
    catalog: tuple = field(default=(), repr=False)

    # kernel and residual
    def exact(self, t, x, y):
        if self.name == "heat":
            return heat_kernel_exact(t, x, y, self.n, self.kappa)
        return diffusion_kernel_exact(t, x, y)

    def residual(self, jet, points):
        p = np.asarray(points, dtype=float)
        if self.name == "heat":
            return heat_residual(jet, self.n, self.kappa)
        return diffusion_residual(jet, p[..., 1], self.b)

    def residual_coefs(self, points):
        """PDE residual as coefficients of K_t, K_x, K_xx (used by loss terms)."""
        if self.name == "heat":
            return {"t": 1.0, "xx": -self.kappa * 1.0}
        x = points[:, 1]
        if np.any(x <= 0):
            raise DomainError("diffusion residual requires x > 0")
        return {"t": 1.0, "xx": -x, "x": -self.b}

    # defining function A(t, x, u, u_t, u_x, u_xx) and its partials
    def defining_function(self, x, f):
        if self.name == "heat":
            return f["u_t"] - self.kappa * f["u_xx"]
        return f["u_t"] - x * f["u_xx"] - self.b * f["u_x"]

    def defining_partials(self, x, f):
        zero = np.zeros_like(f["u"])
        if self.name == "heat":
            return {"t": zero, "x": zero, "u": zero, "u_t": 1.0, "u_x": 0.0, "u_xx": -self.kappa}
        return {"t": zero, "x": -f["u_xx"], "u": zero, "u_t": 1.0, "u_x": -self.b, "u_xx": -x}

    # generators
    def generator(self, label):
        for entry in self.catalog:
            if entry.generator.label == label:
                return entry.generator
        raise KeyError(label)

    @property
    def invariant_generator(self):
        return next(e.generator for e in self.catalog if e.invariant)

    @property
    def labels(self):
        return [e.generator.label for e in self.catalog]


def heat_problem(n=1, kappa=0.5, t_max=1.0, x_lo=-2.0, x_hi=2.0):
    return PdeProblem(
        "heat", Domain(t_max, x_lo, x_hi, 0.0), n=n, kappa=kappa,
        catalog=tuple(heat_catalog(n, kappa)),
    )


def diffusion_problem(b=0.5, t_max=1.0, x_lo=0.05, x_hi=2.0, t_floor=0.02):
    if x_lo <= 0:
        raise UsageError("diffusion domain must stay in x > 0")
    return PdeProblem(
        "diffusion", Domain(t_max, x_lo, x_hi, t_floor), b=b,
        catalog=tuple(diffusion_catalog(b)),
    )


PROBLEMS = {"heat": heat_problem, "diffusion": diffusion_problem}


def get_problem(name, **kwargs):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise UsageError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**kwargs)


__all__ = [
    "CatalogEntry",
    "Domain",
    "PdeProblem",
    "cauchy_solve",
    "compose_kernel",
    "diffusion_kernel_exact",
    "diffusion_problem",
    "diffusion_residual",
    "gauss_legendre",
    "get_problem",
    "heat_kernel_exact",
    "heat_problem",
    "heat_residual",
    "kernel_jet",
]
