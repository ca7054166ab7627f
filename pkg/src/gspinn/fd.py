"""Richardson-extrapolated central differences.

Used only as an independent check on the jet and gradient machinery.
"""
import numpy as np

DEFAULT_STEP = 1e-4


def _central1(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _central2(f, x, h):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def derivative(f, x, h=DEFAULT_STEP, order=1):
    """First or second derivative of scalar ``f`` at ``x`` with one Richardson level."""
    central = {1: _central1, 2: _central2}[order]
    coarse = central(f, x, h)
    fine = central(f, x, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def gradient(f, theta, coords, h=DEFAULT_STEP):
    """Partial derivatives of ``f(theta)`` along the listed coordinates of ``theta``."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty(len(coords))
    for k, i in enumerate(coords):
        def g(v, i=i):
            th = theta.copy()
            th[i] = v
            return f(th)

        out[k] = derivative(g, theta[i], h)
    return out
