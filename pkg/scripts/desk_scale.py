"""Desk-scale PINN vs GsPINN grid (heat and diffusion, three seeds each).

Results are cached under runs/desk_scale/<problem>_<mode>/ together with a key
built from the config hash and a hash of the numerical source files; a cached
grid entry is reused only when both match.  Set GSPINN_ACCEPTANCE_FRESH=1 to
force retraining.

    python3 scripts/desk_scale.py            # run / reuse everything, print a table
    python3 scripts/desk_scale.py heat       # one problem only
"""
from __future__ import annotations

import hashlib
import json
import os
import shutil
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

import gspinn
from gspinn.config import config_from_dict
from gspinn.experiment import read_summary, run_experiment

ROOT = Path(__file__).resolve().parents[1]
CACHE = ROOT / "runs" / "desk_scale"
NUMERIC_SOURCES = (
    "autodiff.py", "kernels.py", "network.py", "optim.py", "problems.py",
    "sampling.py", "symmetry.py", "training.py", "experiment.py", "jets.py",
)
COUNTS = {"heat": [500, 5000, 5000], "diffusion": [500, 3000, 3000]}
SEEDS = 3


def grid():
    out = {}
    for problem, counts in COUNTS.items():
        for mode in ("pinn", "gspinn"):
            name = f"{problem}_{mode}"
            out[name] = config_from_dict({
                "problem": problem,
                "mode": mode,
                "sampler": {"counts": counts},
                "train": {"adam_steps": 3000, "lbfgs_max_iter": 2000},
                "seed": 0,
                "repeat": SEEDS,
                "out": str(CACHE / name),
            })
    return out


def source_hash():
    h = hashlib.sha256()
    pkg = Path(gspinn.__file__).parent
    for name in NUMERIC_SOURCES:
        h.update((pkg / name).read_bytes())
    return h.hexdigest()[:16]


def cache_key(cfg):
    return {"config_hash": cfg.config_hash(), "source_hash": source_hash()}


def load_or_run(name, cfg, fresh=None):
    """Summary rows plus per-seed run.json metadata for one grid entry."""
    fresh = os.environ.get("GSPINN_ACCEPTANCE_FRESH") == "1" if fresh is None else fresh
    out = Path(cfg.out)
    key_file = out / "cache_key.json"
    key = cache_key(cfg)
    hit = (
        not fresh
        and key_file.exists()
        and json.loads(key_file.read_text()) == key
        and (out / "summary.csv").exists()
    )
    if not hit:
        if out.exists():
            shutil.rmtree(out)
        with threadpool_limits(limits=1):
            run_experiment(cfg)
        key_file.write_text(json.dumps(key))
    rows = read_summary(out / "summary.csv")
    meta = [json.loads((out / f"seed_{s}" / "run.json").read_text()) for s in cfg.seeds]
    return rows, meta, hit


def main(argv):
    wanted = set(argv) or set(COUNTS)
    for name, cfg in grid().items():
        if name.split("_")[0] not in wanted:
            continue
        rows, _, hit = load_or_run(name, cfg)
        print(f"[{name}] {'cached' if hit else 'trained'}")
        for r in rows:
            print("  " + ", ".join(f"{k}={v}" for k, v in r.items()))
        sys.stdout.flush()


if __name__ == "__main__":
    main(sys.argv[1:])
