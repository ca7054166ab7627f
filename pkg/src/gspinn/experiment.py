"""Run PINN / GsPINN experiments from a config and write their artifacts.

Layout under ``cfg.out``::

    summary.csv                 one row per (run, seed), appended
    seed_<s>/params.gspn
    seed_<s>/training_log.csv
    seed_<s>/plot_slice.csv     x, k_pred, k_exact at t = 0.5, y = box midpoint
    seed_<s>/run.json           config, config hash, stop reason, final losses
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import forward_jets
from .errors import ConfigError, GspinnError
from .network import init_mlp, save_params
from .sampling import SamplerConfig
from .training import LOG_COLUMNS, evaluate_mse, train

SUMMARY_COLUMNS = ("algorithm", "mse", "loss_init", "loss_res", "loss_sym", "time_s", "n_i", "n_r", "n_s", "seed")
SLICE_T = 0.5
ALGORITHMS = {"pinn": "PINN", "gspinn": "GsPINN"}


@dataclass
class SummaryRow:
    algorithm: str
    mse: float
    loss_init: float
    loss_res: float
    loss_sym: float | None
    time_s: float
    n_i: int
    n_r: int
    n_s: int
    seed: int
    stop_reason: str = ""

    def as_csv(self):
        return [_fmt(getattr(self, c)) for c in SUMMARY_COLUMNS]


def _fmt(v):
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_training_log(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in LOG_COLUMNS])


def append_summary(path, row):
    """Append one row, writing the header for a new file and refusing a foreign one."""
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    if not new:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
        if tuple(header or ()) != SUMMARY_COLUMNS:
            raise ConfigError(f"{path} exists with a different header {header}")
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(SUMMARY_COLUMNS)
        w.writerow(row.as_csv())


def read_summary(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def slice_points(domain, nx=101, t=SLICE_T):
    x = np.linspace(domain.x_lo, domain.x_hi, nx)
    y = 0.5 * (domain.x_lo + domain.x_hi)
    t = min(t, domain.t_max)
    return np.column_stack([np.full(nx, t), x, np.full(nx, y)])


def write_plot_slice(path, params, problem):
    pts = slice_points(problem.domain)
    pred = forward_jets(params, pts, ("v",)).K
    exact = problem.exact(pts[:, 0], pts[:, 1], pts[:, 2])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("x", "k_pred", "k_exact"))
        for xv, p, e in zip(pts[:, 1], pred, exact):
            w.writerow((_fmt(xv), _fmt(p), _fmt(e)))


def run_single(cfg, seed, problem=None):
    """Train one seed.  Returns ``(params, report, SummaryRow)``."""
    problem = cfg.build_problem() if problem is None else problem
    n0, nr, ns = cfg.effective_counts
    sampler = SamplerConfig.for_domain(
        problem.domain, n_init=n0, n_res=nr, n_sym=ns, sigma=cfg.sigma,
        seed=seed, resample=cfg.resample,
    )
    gen = None
    if cfg.mode == "gspinn":
        gen = problem.generator(cfg.generator) if cfg.generator else problem.invariant_generator
    tcfg = type(cfg.train)(**{**cfg.train.__dict__, "seed": seed})
    params = init_mlp(cfg.arch, seed)
    t0 = time.perf_counter()
    params, report = train(params, problem, sampler, tcfg, cfg.weights, gen)
    elapsed = time.perf_counter() - t0
    report.mse = evaluate_mse(params, problem)
    last = report.final or {}
    row = SummaryRow(
        ALGORITHMS[cfg.mode], report.mse, last.get("loss_init"), last.get("loss_res"),
        last.get("loss_sym") if cfg.mode == "gspinn" else None,
        elapsed, n0, nr, ns, seed, report.stop_reason,
    )
    return params, report, row


def run_experiment(cfg, out=None):
    """Train every seed of ``cfg`` and write all artifacts; returns the summary rows.

    A run that fails with a library error still gets a row (mse ``nan``) and
    the remaining seeds continue.
    """
    out = Path(cfg.out if out is None else out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"out: cannot create {out}: {exc.strerror}") from None
    problem = cfg.build_problem()
    chash = cfg.config_hash()
    rows = []
    for seed in cfg.seeds:
        d = out / f"seed_{seed}"
        d.mkdir(exist_ok=True)
        meta = {"config": cfg.to_dict(), "config_hash": chash, "seed": seed}
        try:
            params, report, row = run_single(cfg, seed, problem)
        except GspinnError as exc:
            n0, nr, ns = cfg.effective_counts
            row = SummaryRow(ALGORITHMS[cfg.mode], float("nan"), None, None, None, 0.0,
                             n0, nr, ns, seed, f"error: {exc}")
            meta.update(stop_reason=row.stop_reason)
        else:
            save_params(params, d / "params.gspn")
            write_training_log(d / "training_log.csv", report.rows)
            write_plot_slice(d / "plot_slice.csv", params, problem)
            meta.update(
                stop_reason=report.stop_reason,
                diagnostic=report.diagnostic,
                adam_iters=report.adam_iters,
                lbfgs_iters=report.lbfgs_iters,
                final=report.final,
                mse=report.mse,
            )
        (d / "run.json").write_text(json.dumps(meta, indent=2, default=float))
        append_summary(out / "summary.csv", row)
        rows.append(row)
    return rows
