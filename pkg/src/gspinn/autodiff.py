"""Batched jets of the MLP output and reverse accumulation through them.

The forward pass propagates, for every collocation point at once, the value
of each hidden unit together with its derivatives along ``t`` and ``x``
(channels ``v, t, x, tt, tx, xx``).  Each layer's intermediates are kept on a
tape; the reverse pass walks the tape backwards applying the adjoint of the
jet-extended affine and tanh maps, so derivatives of loss terms built from
``K_t``, ``K_xx`` etc. with respect to every weight come out exactly.

Loss terms are linear functionals of the output channels minus a target,
squared and halved (see :class:`LinearTerm`); every residual used for
training (initial fit, PDE residual, symmetry characteristic) has that form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NumericError, UsageError

FIRST = ("t", "x")
PAIRS = {"tt": ("t", "t"), "tx": ("t", "x"), "xx": ("x", "x")}
CHANNELS = ("v", "t", "x", "tt", "tx", "xx")
ORDER_CHANNELS = {0: ("v",), 1: ("v", "t", "x"), 2: ("v", "t", "x", "xx")}

@dataclass
class KernelJet:
    """K and its partials at a batch of points (``None`` when not computed)."""

    K: np.ndarray
    K_t: np.ndarray | None = None
    K_x: np.ndarray | None = None
    K_xx: np.ndarray | None = None
    K_tt: np.ndarray | None = None
    K_tx: np.ndarray | None = None

    _NAMES = {"v": "K", "t": "K_t", "x": "K_x", "xx": "K_xx", "tt": "K_tt", "tx": "K_tx"}

    @classmethod
    def from_channels(cls, ch):
        return cls(**{cls._NAMES[c]: v for c, v in ch.items()})

    def channel(self, c):
        return getattr(self, self._NAMES[c])


def closure(channels):
    """Channels that must be propagated to produce ``channels``."""
    need = {"v"}
    for c in channels:
        if c not in CHANNELS:
            raise UsageError(f"unknown jet channel {c!r}")
        need.add(c)
        if c in PAIRS:
            need.update(PAIRS[c])
    return tuple(c for c in CHANNELS if c in need)


def _as_points(points):
    p = np.asarray(points, dtype=np.float64)
    if p.ndim == 1:
        p = p[None, :]
    if p.ndim != 2 or p.shape[1] != 3:
        raise UsageError(f"points must have shape (N, 3), got {p.shape}")
    return p


def _index(channels):
    return tuple(channels.index(c) if c in channels else -1 for c in CHANNELS[1:])


def _input_stack(points, channels):
    n = len(points)
    X = np.zeros((len(channels), n, 3))
    X[0] = points
    for c in FIRST:
        if c in channels:
            X[channels.index(c), :, FIRST.index(c)] = 1.0
    return X


def _affine(A, W, b):
    C, n, _ = A.shape
    H = (A.reshape(C * n, -1) @ W).reshape(C, n, -1)
    H[0] += b
    return H


def _forward(params, points, channels):
    """Jet-extended forward pass.

    Jets are stacked as arrays of shape (channels, N, width).  The tape holds,
    per layer, the layer input and (hidden layers) the pre-activation stack.
    Returns the (channels, N) output and the tape.
    """
    idx = _index(channels)
    A = _input_stack(points, channels)
    tape = []
    last = params.n_layers - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        H = _affine(A, W, b)
        tape.append((A, H))
        if l == last:
            return H[:, :, 0], tape
        A = np.empty_like(H)
        kernels.tanh_forward(H, A, *idx)
    raise AssertionError("unreachable")


def _first_bad_layer(tape):
    for l, (A, H) in enumerate(tape):
        if not np.isfinite(H).all():
            return l
    return None


def _checked_forward(params, points, channels):
    with np.errstate(over="ignore", invalid="ignore"):
        out, tape = _forward(params, points, channels)
    if not np.isfinite(out).all():
        layer = _first_bad_layer(tape)
        raise NumericError(f"non-finite value in network layer {layer}", layer=layer)
    return out, tape


def forward_jets(params, points, channels=ORDER_CHANNELS[2]):
    """K, K_t, K_x, K_xx (by default) at one point or an (N, 3) batch."""
    pts = _as_points(points)
    chans = closure(channels)
    out, _ = _checked_forward(params, pts, chans)
    return KernelJet.from_channels({c: out[k] for k, c in enumerate(chans)})


def _backward(params, tape, channels, G):
    """Adjoint pass; ``G`` is the (channels, N) adjoint of the output stack."""
    idx = _index(channels)
    parts = [None] * (2 * params.n_layers)
    GH = G[:, :, None]
    for l in range(params.n_layers - 1, -1, -1):
        A, _ = tape[l]
        W = params.weights[l]
        C, n, w_in = A.shape
        parts[2 * l] = (A.reshape(C * n, w_in).T @ GH.reshape(C * n, -1)).ravel()
        parts[2 * l + 1] = GH[0].sum(axis=0)
        if l == 0:
            break
        if W.shape[1] == 1:
            GA = GH * W[:, 0]  # outer product; broadcasting beats a rank-1 GEMM
        else:
            GA = (GH.reshape(C * n, -1) @ W.T).reshape(C, n, w_in)
        H_prev = tape[l - 1][1]
        GH = np.empty_like(GA)
        kernels.tanh_backward(H_prev, A[0], GA, GH, *idx)
    return np.concatenate(parts)


@dataclass
class LinearTerm:
    """One loss term ``0.5 * sum_i (sum_c coefs[c]_i * J_c(p_i) - target_i)^2``.

    ``coefs`` maps output channels to per-point arrays or scalars.
    """

    name: str
    points: np.ndarray
    coefs: dict
    target: np.ndarray | float = 0.0
    weight: float = 1.0
    channels: tuple = field(init=False)

    def __post_init__(self):
        self.points = _as_points(self.points) if len(self.points) else np.zeros((0, 3))
        self.channels = closure(self.coefs)
        if self.weight < 0 or not np.isfinite(self.weight):
            raise UsageError(f"loss weight for {self.name!r} must be finite and >= 0")

    def residual(self, out):
        """Residual per point from the (channels, N) output stack."""
        r = None
        for c, k in self.coefs.items():
            term = k * out[self.channels.index(c)]
            r = term if r is None else r + term
        return r - self.target


def _term_forward(params, term):
    out, tape = _checked_forward(params, term.points, term.channels)
    r = term.residual(out)
    if not np.isfinite(r).all():
        idx = int(np.flatnonzero(~np.isfinite(r))[0])
        raise NumericError(
            f"non-finite {term.name} residual at collocation point {idx} "
            f"{tuple(term.points[idx])}",
            index=idx,
            term=term.name,
        )
    return r, tape


def _sum_components(spec, comps):
    total = 0.0
    for term in spec:
        total += term.weight * comps[term.name]
    return total


def loss_value(params, spec):
    """Loss components (and ``"total"``) without the reverse pass."""
    comps = {}
    for term in spec:
        if len(term.points) == 0:
            comps[term.name] = 0.0
            continue
        r, _ = _term_forward(params, term)
        comps[term.name] = 0.5 * float(r @ r)
    comps["total"] = _sum_components(spec, comps)
    return comps


def loss_gradient(params, spec):
    """Loss components and the gradient with respect to the flat parameters."""
    comps = {}
    grad = np.zeros(params.n_params)
    for term in spec:
        if len(term.points) == 0:
            comps[term.name] = 0.0
            continue
        r, tape = _term_forward(params, term)
        comps[term.name] = 0.5 * float(r @ r)
        if term.weight == 0.0:
            continue
        wr = term.weight * r
        G = np.zeros((len(term.channels), len(r)))
        for c, k in term.coefs.items():
            G[term.channels.index(c)] += wr * k
        grad += _backward(params, tape, term.channels, G)
    comps["total"] = _sum_components(spec, comps)
    return comps, grad
