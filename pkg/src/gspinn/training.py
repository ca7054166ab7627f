"""Loss assembly, the Adam then L-BFGS training loop and test-grid evaluation."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import optim
from .autodiff import LinearTerm, forward_jets, loss_gradient, loss_value
from .errors import NumericError, UsageError
from .sampling import sample_batch
from .symmetry import characteristic_coefs

LOG_COLUMNS = ("iter", "loss_total", "loss_init", "loss_res", "loss_sym", "lr", "elapsed_s")


@dataclass(frozen=True)
class LossWeights:
    init: float = 1.0
    res: float = 1.0
    sym: float = 1.0
    data: float = 1.0
    boundary: float = 1.0

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not (math.isfinite(v) and v >= 0):
                raise UsageError(f"loss weight {k} must be finite and >= 0")


@dataclass(frozen=True)
class TrainConfig:
    adam_steps: int = 3000
    lr: float = 1e-3
    gamma: float = 0.98
    loops: int = 50
    e_stop: float | None = 1e-4
    m: int = 10
    lbfgs_max_iter: int = 5000
    c1: float = 1e-4
    c2: float = 0.9
    gtol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise UsageError("gamma must be in (0,1]")
        if not 0 < self.c1 < self.c2 < 1:
            raise UsageError("Wolfe constants must satisfy 0 < c1 < c2 < 1")
        if self.adam_steps < 0 or self.lbfgs_max_iter < 0:
            raise UsageError("steps must be >= 0")
        if self.loops < 1:
            raise UsageError("loops must be >= 1")
        if not self.lr > 0:
            raise UsageError("lr must be > 0")
        if self.m < 1:
            raise UsageError("m must be >= 1")


@dataclass
class TrainReport:
    rows: list = field(default_factory=list)
    mse: float | None = None
    stop_reason: str = ""
    diagnostic: str = ""
    adam_iters: int = 0
    lbfgs_iters: int = 0
    history: list = field(default_factory=list)  # L-BFGS line-search records

    @property
    def final(self):
        return self.rows[-1] if self.rows else None

    def extend(self, other):
        self.rows.extend(other.rows)
        self.stop_reason = other.stop_reason
        self.diagnostic = other.diagnostic or self.diagnostic
        self.adam_iters += other.adam_iters
        self.lbfgs_iters += other.lbfgs_iters
        self.history.extend(other.history)


def lr_schedule(k, cfg):
    """Learning rate for 50-step iteration ``k``: lr * gamma**k."""
    if k < 0:
        raise UsageError("iteration index must be >= 0")
    return cfg.lr * cfg.gamma**k


# -- loss ----------------------------------------------------------------------


def build_loss_spec(problem, batch, generator=None, weights=LossWeights(), data=None, boundary=None):
    """Loss terms for one batch.

    ``generator`` switches on the symmetry term (its characteristic Q is
    penalised at ``batch.sym_points``).  ``data`` and ``boundary`` are optional
    ``(points, values)`` pairs fitted like the initial term.
    """
    spec = [
        LinearTerm("init", batch.init_points, {"v": 1.0}, batch.init_targets, weights.init),
        LinearTerm("res", batch.res_points, problem.residual_coefs(batch.res_points), 0.0, weights.res),
    ]
    if generator is not None:
        pts = batch.sym_points
        coefs = characteristic_coefs(generator, pts) if len(pts) else {"v": 1.0}
        spec.append(LinearTerm("sym", pts, coefs, 0.0, weights.sym))
    for name, extra, w in (("data", data, weights.data), ("boundary", boundary, weights.boundary)):
        if extra is not None:
            pts, vals = extra
            spec.append(LinearTerm(name, pts, {"v": 1.0}, np.asarray(vals, float), w))
    return spec


def total_loss(params, spec):
    """Components per term name plus ``"total"``."""
    return loss_value(params, spec)


# -- training loop -------------------------------------------------------------


class _Objective:
    """Flat-vector loss with the components of the last evaluation kept around."""

    def __init__(self, params, spec):
        self.params = params
        self.spec = spec
        self.comps = None
        self.error = None

    def __call__(self, theta):
        try:
            comps, g = loss_gradient(self.params.with_flat(theta), self.spec)
        except NumericError as exc:
            self.error = str(exc)
            return math.nan, np.full(len(theta), math.nan)
        self.comps = comps
        return comps["total"], g


def _row(it, comps, lr, t0):
    return {
        "iter": it,
        "loss_total": comps["total"],
        "loss_init": comps.get("init", 0.0),
        "loss_res": comps.get("res", 0.0),
        "loss_sym": comps.get("sym"),
        "lr": lr,
        "elapsed_s": time.perf_counter() - t0,
    }


def run_adam(params, spec, cfg, t0=None, rebatch=None):
    """Adam phase: ``cfg.adam_steps`` full-batch steps, early exit at ``e_stop``.

    ``rebatch(k)``, when given, returns a fresh loss spec for iteration ``k``.
    Returns ``(params, report)``; on a non-finite loss the last finite
    iterate is returned with a diagnostic.
    """
    t0 = time.perf_counter() if t0 is None else t0
    report = TrainReport()
    obj = _Objective(params, spec)
    opt = optim.Adam(params.flatten())
    good = opt.x.copy()
    report.stop_reason = "max-iters"
    steps = cfg.adam_steps
    k = -1
    for step in range(steps + 1):
        it = step // cfg.loops
        if rebatch is not None and step % cfg.loops == 0 and step < steps:
            obj.spec = rebatch(it)
        f, g = obj(opt.x)
        if not (math.isfinite(f) and np.isfinite(g).all()):
            report.stop_reason = "non-finite"
            report.diagnostic = obj.error or "non-finite loss gradient"
            opt.x = good
            break
        good = opt.x.copy()
        stop = optim._stop_enabled(cfg.e_stop) and f <= cfg.e_stop
        if step % cfg.loops == 0 or step == steps or stop:
            report.rows.append(_row(it, obj.comps, lr_schedule(it, cfg), t0))
        if stop:
            report.stop_reason = "e_stop"
            break
        if step == steps:
            break
        opt.step(g, lr_schedule(it, cfg))
        k = step
    report.adam_iters = k + 1
    return params.with_flat(opt.x), report


def run_lbfgs(params, spec, cfg, t0=None, first_iter=0):
    """L-BFGS phase; one log row per accepted step (``lr`` holds the step length)."""
    t0 = time.perf_counter() if t0 is None else t0
    report = TrainReport()
    obj = _Objective(params, spec)
    x0 = params.flatten()
    f0, g0 = obj(x0)
    if not math.isfinite(f0):
        report.stop_reason = "non-finite"
        report.diagnostic = obj.error or "non-finite initial loss"
        return params, report

    def cb(k, x, f, alpha):
        report.rows.append(_row(first_iter + k + 1, obj.comps, alpha, t0))

    res = optim.lbfgs(
        obj, x0, max_iter=cfg.lbfgs_max_iter, m=cfg.m, c1=cfg.c1, c2=cfg.c2,
        gtol=cfg.gtol, e_stop=cfg.e_stop, f0=f0, g0=g0, callback=cb,
    )
    report.stop_reason = res.reason
    report.lbfgs_iters = res.iterations
    report.history = res.history
    if res.reason == "line-search-failure" and obj.error:
        report.diagnostic = obj.error
    return params.with_flat(res.x), report


def train(params, problem, sampler, cfg, weights=LossWeights(), generator=None):
    """Adam then L-BFGS on batches drawn from ``sampler``.

    L-BFGS runs on the last batch and is skipped when Adam already met
    ``e_stop`` or failed.
    """
    t0 = time.perf_counter()
    batch = sample_batch(sampler, 0)
    spec = build_loss_spec(problem, batch, generator, weights)
    rebatch = None
    if sampler.resample:
        def rebatch(k):
            return build_loss_spec(problem, sample_batch(sampler, k), generator, weights)
    params, report = run_adam(params, spec, cfg, t0, rebatch)
    if report.stop_reason == "max-iters" and cfg.lbfgs_max_iter > 0:
        if rebatch is not None:
            spec = rebatch(report.rows[-1]["iter"])
        last = report.rows[-1]["iter"] if report.rows else 0
        params, lb = run_lbfgs(params, spec, cfg, t0, first_iter=last)
        report.extend(lb)
    return params, report


# -- evaluation ----------------------------------------------------------------


def eval_grid(domain, nt=17, nx=33):
    t = np.linspace(0.1, domain.t_max, nt)
    x = np.linspace(domain.x_lo, domain.x_hi, nx)
    T, X, Y = np.meshgrid(t, x, x, indexing="ij")
    return np.column_stack([T.ravel(), X.ravel(), Y.ravel()])


def evaluate_mse(params, problem, grid=None):
    """Mean squared error against the exact kernel on the test grid.

    ``params`` is a network or any callable ``(t, x, y) -> K``.
    """
    pts = eval_grid(problem.domain) if grid is None else grid
    if callable(params):
        pred = params(pts[:, 0], pts[:, 1], pts[:, 2])
    else:
        pred = forward_jets(params, pts, ("v",)).K
    exact = problem.exact(pts[:, 0], pts[:, 1], pts[:, 2])
    return float(np.mean((pred - exact) ** 2))
