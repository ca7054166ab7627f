"""Full-batch optimizers: Adam and L-BFGS with a strong-Wolfe line search.

Both take an objective ``fun(x) -> (f, grad)`` on flat float64 vectors.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np


def _stop_enabled(e_stop):
    # None and +inf both switch the stop criterion off
    return e_stop is not None and math.isfinite(e_stop)


@dataclass
class OptimResult:
    x: np.ndarray
    f: float
    iterations: int
    reason: str
    evaluations: int = 0
    history: list = field(default_factory=list)


class Adam:
    """Adam state (bias-corrected moments) for a flat parameter vector."""

    def __init__(self, x0, beta1=0.9, beta2=0.999, eps=1e-8):
        self.x = np.array(x0, dtype=np.float64)
        self.m = np.zeros_like(self.x)
        self.v = np.zeros_like(self.x)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def step(self, g, lr):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        self.m = b1 * self.m + (1.0 - b1) * g
        self.v = b2 * self.v + (1.0 - b2) * (g * g)
        mhat = self.m / (1.0 - b1**self.t)
        vhat = self.v / (1.0 - b2**self.t)
        self.x = self.x - lr * mhat / (np.sqrt(vhat) + self.eps)
        return self.x


def adam(fun, x0, steps, lr, beta1=0.9, beta2=0.999, eps=1e-8, e_stop=None, callback=None):
    """Run ``steps`` Adam updates.

    ``lr`` is a float or a function of the step index.  Stops early once the
    loss at the current iterate is <= ``e_stop``.  A non-finite loss aborts
    and returns the last iterate with a finite loss.
    """
    lr_fn = lr if callable(lr) else (lambda k: lr)
    opt = Adam(x0, beta1, beta2, eps)
    good_x, good_f = opt.x.copy(), float("nan")
    for k in range(steps):
        f, g = fun(opt.x)
        if not (math.isfinite(f) and np.isfinite(g).all()):
            return OptimResult(good_x, good_f, k, "non-finite", k + 1)
        good_x, good_f = opt.x.copy(), f
        if callback is not None:
            callback(k, opt.x, f)
        if _stop_enabled(e_stop) and f <= e_stop:
            return OptimResult(good_x, f, k, "e_stop", k + 1)
        opt.step(g, lr_fn(k))
    return OptimResult(opt.x, good_f, steps, "max-iters", steps)


# -- line search -------------------------------------------------------------


@dataclass
class LineSearchRecord:
    """Data to re-check both Wolfe conditions for one accepted step."""

    alpha: float
    f0: float
    dphi0: float
    f: float
    dphi: float
    evaluations: int

    def armijo(self, c1):
        return self.f <= self.f0 + c1 * self.alpha * self.dphi0

    def curvature(self, c2):
        return abs(self.dphi) <= c2 * abs(self.dphi0)


def _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi):
    d1 = d_lo + d_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi)
    rad = d1 * d1 - d_lo * d_hi
    if rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), a_hi - a_lo)
    den = d_hi - d_lo + 2.0 * d2
    if den == 0:
        return None
    return a_hi - (a_hi - a_lo) * (d_hi + d2 - d1) / den


def strong_wolfe(phi, f0, dphi0, alpha0=1.0, c1=1e-4, c2=0.9, alpha_max=1e10, max_iter=30):
    """Bracketing + zoom search for a step satisfying the strong Wolfe conditions.

    ``phi(alpha) -> (f, dphi, payload)``.  Returns ``(alpha, f, dphi, payload,
    evaluations)`` or ``None`` when no acceptable step was found.
    """
    evals = 0

    def ev(a):
        nonlocal evals
        evals += 1
        f, d, p = phi(a)
        if not (math.isfinite(f) and math.isfinite(d)):
            return math.inf, math.nan, None
        return f, d, p

    def zoom(lo, hi):
        a_lo, f_lo, d_lo = lo
        a_hi, f_hi, d_hi = hi
        for _ in range(max_iter):
            width = a_hi - a_lo
            a = None
            if math.isfinite(f_hi) and math.isfinite(d_hi):
                a = _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
            lo_b, hi_b = sorted((a_lo + 0.1 * width, a_hi - 0.1 * width))
            if a is None or not (lo_b <= a <= hi_b):
                a = 0.5 * (a_lo + a_hi)
            f, d, p = ev(a)
            if f > f0 + c1 * a * dphi0 or f >= f_lo:
                a_hi, f_hi, d_hi = a, f, d
            else:
                if abs(d) <= -c2 * dphi0:
                    return a, f, d, p
                if d * (a_hi - a_lo) >= 0:
                    a_hi, f_hi, d_hi = a_lo, f_lo, d_lo
                a_lo, f_lo, d_lo = a, f, d
            if abs(a_hi - a_lo) <= 1e-16 * max(1.0, abs(a_lo)):
                break
        return None

    prev = (0.0, f0, dphi0)
    alpha = alpha0
    for i in range(max_iter):
        f, d, p = ev(alpha)
        if f > f0 + c1 * alpha * dphi0 or (i > 0 and f >= prev[1]):
            out = zoom(prev, (alpha, f, d))
            break
        if abs(d) <= -c2 * dphi0:
            out = (alpha, f, d, p)
            break
        if d >= 0:
            out = zoom((alpha, f, d), prev)
            break
        prev = (alpha, f, d)
        alpha = min(2.0 * alpha, alpha_max)
    else:
        out = None
    if out is None:
        return None
    return (*out, evals)


# -- L-BFGS ------------------------------------------------------------------


def _two_loop(g, S, Y, rho):
    q = g.copy()
    alphas = []
    for s, y, r in zip(reversed(S), reversed(Y), reversed(rho)):
        a = r * (s @ q)
        alphas.append(a)
        q -= a * y
    if S:
        q *= (S[-1] @ Y[-1]) / (Y[-1] @ Y[-1])
    for (s, y, r), a in zip(zip(S, Y, rho), reversed(alphas)):
        b = r * (y @ q)
        q += (a - b) * s
    return -q


def lbfgs(
    fun,
    x0,
    max_iter=5000,
    m=10,
    c1=1e-4,
    c2=0.9,
    gtol=1e-9,
    e_stop=None,
    f0=None,
    g0=None,
    callback=None,
):
    """Limited-memory BFGS; every accepted step satisfies the strong Wolfe conditions.

    Terminates on ``max|g| <= gtol``, loss <= ``e_stop``, ``max_iter`` or a
    failed line search (reason ``"line-search-failure"``; the last accepted
    iterate, which is also the best one seen, is returned).
    """
    x = np.array(x0, dtype=np.float64)
    if f0 is None or g0 is None:
        f, g = fun(x)
        evals = 1
    else:
        f, g = float(f0), np.asarray(g0, dtype=np.float64)
        evals = 0
    if not (math.isfinite(f) and np.isfinite(g).all()):
        return OptimResult(x, f, 0, "non-finite", evals)
    S, Y, rho = deque(maxlen=m), deque(maxlen=m), deque(maxlen=m)
    history = []
    reason = "max-iters"
    for k in range(max_iter):
        if np.max(np.abs(g)) <= gtol:
            reason = "gradient"
            break
        if _stop_enabled(e_stop) and f <= e_stop:
            reason = "e_stop"
            break
        d = _two_loop(g, S, Y, rho)
        dphi0 = float(g @ d)
        if not dphi0 < 0:
            S.clear(), Y.clear(), rho.clear()
            d = -g
            dphi0 = float(g @ d)
        alpha0 = 1.0 if S else min(1.0, 1.0 / np.sum(np.abs(g)))

        def phi(a, d=d):
            fa, ga = fun(x + a * d)
            return fa, float(ga @ d), ga

        ls = strong_wolfe(phi, f, dphi0, alpha0, c1, c2)
        if ls is None:
            reason = "line-search-failure"
            break
        alpha, f_new, dphi_new, g_new, n_ev = ls
        evals += n_ev
        history.append(LineSearchRecord(alpha, f, dphi0, f_new, dphi_new, n_ev))
        s = alpha * d
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            S.append(s)
            Y.append(yv)
            rho.append(1.0 / sy)
        x = x + s
        f, g = f_new, g_new
        if callback is not None:
            callback(k, x, f, alpha)
    return OptimResult(x, f, len(history), reason, evals, history)
