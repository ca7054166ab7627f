"""Collocation batches: initial-surface, interior residual and symmetry points.

Each point set is drawn from its own named Philox stream keyed by
(seed, stream, iteration), so any batch can be regenerated on its own.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

STREAMS = {"initial": 0, "residual": 1, "symmetry": 2}


@dataclass(frozen=True)
class SamplerConfig:
    n_init: int = 500
    n_res: int = 5000
    n_sym: int = 5000
    t_max: float = 1.0
    x_lo: float = -2.0
    x_hi: float = 2.0
    t_floor: float = 0.0
    sigma: float = 0.1
    seed: int = 0
    resample: bool = False

    def __post_init__(self):
        if min(self.n_init, self.n_res, self.n_sym) < 0:
            raise UsageError("collocation counts must be >= 0")
        if not self.sigma > 0:
            raise UsageError("sigma must be > 0")
        if not (self.t_max > self.t_floor >= 0 and self.x_hi > self.x_lo):
            raise UsageError("degenerate domain box")

    @property
    def counts(self):
        return [self.n_init, self.n_res, self.n_sym]

    @classmethod
    def for_domain(cls, domain, **kw):
        return cls(t_max=domain.t_max, x_lo=domain.x_lo, x_hi=domain.x_hi,
                   t_floor=domain.t_floor, **kw)


@dataclass
class CollocationBatch:
    init_points: np.ndarray
    init_targets: np.ndarray
    res_points: np.ndarray
    sym_points: np.ndarray

    @property
    def counts(self):
        return [len(self.init_points), len(self.res_points), len(self.sym_points)]


def stream(seed, name, iteration=0):
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS[name], iteration))
    return np.random.Generator(np.random.Philox(ss))


def gaussian_target(x, y, sigma):
    """Narrow Gaussian standing in for delta(x - y); sigma is a standard deviation."""
    return np.exp(-((x - y) ** 2) / (2.0 * sigma * sigma)) / np.sqrt(2.0 * np.pi * sigma * sigma)


def sample_initial(cfg, iteration=0):
    rng = stream(cfg.seed, "initial", iteration)
    xy = rng.uniform(cfg.x_lo, cfg.x_hi, size=(cfg.n_init, 2))
    pts = np.column_stack([np.zeros(cfg.n_init), xy])
    return pts, gaussian_target(xy[:, 0], xy[:, 1], cfg.sigma)


def _interior(cfg, name, count, iteration):
    rng = stream(cfg.seed, name, iteration)
    u = rng.random(count)
    # maps [0, 1) onto (t_floor, t_max]
    t = cfg.t_max - (cfg.t_max - cfg.t_floor) * u
    xy = rng.uniform(cfg.x_lo, cfg.x_hi, size=(count, 2))
    return np.column_stack([t, xy])


def sample_residual(cfg, iteration=0):
    return _interior(cfg, "residual", cfg.n_res, iteration)


def sample_symmetry(cfg, iteration=0):
    return _interior(cfg, "symmetry", cfg.n_sym, iteration)


def sample_batch(cfg, iteration=0):
    init, targets = sample_initial(cfg, iteration)
    return CollocationBatch(init, targets, sample_residual(cfg, iteration), sample_symmetry(cfg, iteration))
