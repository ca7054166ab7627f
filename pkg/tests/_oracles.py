"""Independent finite-difference oracles shared by the unit and acceptance tests."""
import numpy as np

from gspinn import fd
from gspinn.autodiff import forward_jets, loss_gradient, loss_value
from gspinn.network import forward, init_mlp


def fd_jets(params, point):
    """K_t, K_x, K_xx, K_tt, K_tx of the plain forward pass by Richardson differences."""
    t, x, y = point

    def K(tt, xx):
        return forward(params, np.array([[tt, xx, y]]))[0]

    # second differences at h = 1e-4 lose ~1e-7 to round-off; 1e-3 keeps
    # both round-off and the Richardson-reduced truncation error near 1e-10
    return {
        "K_t": fd.derivative(lambda s: K(s, x), t),
        "K_x": fd.derivative(lambda s: K(t, s), x),
        "K_xx": fd.derivative(lambda s: K(t, s), x, 1e-3, order=2),
        "K_tt": fd.derivative(lambda s: K(s, x), t, 1e-3, order=2),
        "K_tx": fd.derivative(lambda s: fd.derivative(lambda q: K(s, q), x, 1e-3), t, 1e-3),
    }


def jet_rel_error(params, point):
    jet = forward_jets(params, point, ("t", "x", "xx", "tt", "tx"))
    ref = fd_jets(params, point)
    worst = 0.0
    for name, approx in ref.items():
        exact = float(getattr(jet, name)[0])
        worst = max(worst, abs(exact - approx) / max(abs(approx), 1e-3))
    return worst


def random_config(rng):
    depth = int(rng.integers(1, 4))
    arch = (3,) + tuple(int(w) for w in rng.integers(4, 24, depth)) + (1,)
    params = init_mlp(arch, int(rng.integers(0, 2**31)))
    point = (float(rng.uniform(0.05, 1.0)), float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)))
    return params, point


def gradient_rel_error(params, spec, coords, h=1e-4):
    """Max relative gap between loss_gradient and differences of loss_value."""
    _, grad = loss_gradient(params, spec)
    theta = params.flatten()
    approx = fd.gradient(lambda th: loss_value(params.with_flat(th), spec)["total"], theta, coords, h)
    exact = grad[coords]
    scale = max(np.max(np.abs(exact)), 1e-8)
    return float(np.max(np.abs(exact - approx) / np.maximum(np.abs(exact), 1e-3 * scale)))
