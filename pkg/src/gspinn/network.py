"""The kernel surrogate K(t, x, y): a tanh MLP with float64 parameters."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, UsageError

DEFAULT_ARCH = (3, 50, 50, 50, 50, 1)
MAGIC = b"GSPN"
VERSION = 1


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Weights ``W[l]`` of shape (n_in, n_out) and biases ``b[l]`` of shape (n_out,)."""

    widths: tuple
    weights: tuple
    biases: tuple
    activation: str = "tanh"
    seed: int | None = None
    _flat_sizes: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, "widths", widths)
        if len(self.weights) != len(widths) - 1 or len(self.biases) != len(widths) - 1:
            raise UsageError("number of layers does not match widths")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (widths[l], widths[l + 1]) or b.shape != (widths[l + 1],):
                raise UsageError(
                    f"layer {l}: expected W {(widths[l], widths[l + 1])} and b "
                    f"{(widths[l + 1],)}, got {W.shape} and {b.shape}"
                )
        sizes = tuple((W.size, b.size) for W, b in zip(self.weights, self.biases))
        object.__setattr__(self, "_flat_sizes", sizes)

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def n_params(self):
        return sum(a + b for a, b in self._flat_sizes)

    def flatten(self):
        """Canonical flat vector: per layer, W row-major then b."""
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def with_flat(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n_params,):
            raise UsageError(f"expected {self.n_params} parameters, got {theta.shape}")
        weights, biases, k = [], [], 0
        for W, b in zip(self.weights, self.biases):
            weights.append(theta[k : k + W.size].reshape(W.shape).copy())
            k += W.size
            biases.append(theta[k : k + b.size].copy())
            k += b.size
        return MlpParams(self.widths, tuple(weights), tuple(biases), self.activation, self.seed)


def param_count(widths):
    return sum((a + 1) * b for a, b in zip(widths[:-1], widths[1:]))


def _check_arch(arch):
    arch = tuple(int(w) for w in arch)
    if len(arch) < 2 or arch[0] != 3 or arch[-1] != 1 or min(arch) < 1:
        raise UsageError(f"architecture must start with 3, end with 1, widths >= 1; got {list(arch)}")
    return arch


def init_mlp(arch=DEFAULT_ARCH, seed=0):
    """Xavier-uniform weights, zero biases; reproducible for a fixed seed."""
    arch = _check_arch(arch)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(arch[:-1], arch[1:]):
        bound = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
        biases.append(np.zeros(n_out))
    return MlpParams(arch, tuple(weights), tuple(biases), "tanh", seed)


def forward(params, points):
    """Plain evaluation of K at an (N, 3) array of (t, x, y) rows."""
    h = np.asarray(points, dtype=np.float64)
    last = params.n_layers - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ W + b
        if l < last:
            h = np.tanh(h)
    return h[:, 0]


def save_params(params, path):
    """Write ``params`` in the versioned little-endian binary format."""
    header = MAGIC + struct.pack("<BI", VERSION, len(params.widths))
    header += struct.pack(f"<{len(params.widths)}I", *params.widths)
    payload = params.flatten().astype("<f8").tobytes()
    Path(path).write_bytes(header + payload)


def load_params(path, expected_widths=None):
    data = Path(path).read_bytes()
    if len(data) < 9 or data[:4] != MAGIC:
        raise FormatError(f"{path}: not a parameter file (bad magic)")
    version, count = struct.unpack_from("<BI", data, 4)
    if version > VERSION:
        raise FormatError(f"{path}: unsupported format version {version} (max {VERSION})")
    if version < 1:
        raise FormatError(f"{path}: invalid format version {version}")
    off = 9
    if len(data) < off + 4 * count:
        raise FormatError(f"{path}: truncated header")
    widths = struct.unpack_from(f"<{count}I", data, off)
    off += 4 * count
    try:
        widths = _check_arch(widths)
    except UsageError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if expected_widths is not None and tuple(expected_widths) != widths:
        raise FormatError(
            f"{path}: architecture {list(widths)} does not match expected {list(expected_widths)}"
        )
    n = param_count(widths)
    if len(data) - off != 8 * n:
        raise FormatError(f"{path}: payload has {len(data) - off} bytes, expected {8 * n}")
    theta = np.frombuffer(data, dtype="<f8", offset=off).astype(np.float64)
    template = MlpParams(
        widths,
        tuple(np.zeros((a, b)) for a, b in zip(widths[:-1], widths[1:])),
        tuple(np.zeros(b) for b in widths[1:]),
    )
    return template.with_flat(theta)
