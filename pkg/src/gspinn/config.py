"""Experiment configuration: strict JSON parsing, defaults and a stable hash.

Schema (every key optional except ``problem``)::

    {
      "problem": "heat" | "diffusion",
      "problem_params": {"n": 1, "kappa": 0.5, "t_max": 1.0, ...},
      "mode": "gspinn" | "pinn",
      "generator": null | "<catalog label>",
      "arch": [3, 50, 50, 50, 50, 1],
      "sampler": {"counts": [500, 5000, 5000], "sigma": 0.1, "resample": false},
      "train": {"adam_steps": 3000, "lr": 0.001, "gamma": 0.98, ...},
      "weights": {"init": 1.0, "res": 1.0, "sym": 1.0},
      "seed": 0,
      "repeat": 1,
      "out": "runs/experiment"
    }
"""
from __future__ import annotations

import dataclasses
import hashlib
import inspect
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, GspinnError
from .network import DEFAULT_ARCH
from .problems import PROBLEMS, get_problem
from .training import LossWeights, TrainConfig

MODES = ("pinn", "gspinn")
TOP_KEYS = {
    "problem", "problem_params", "mode", "generator", "arch", "sampler",
    "train", "weights", "seed", "repeat", "out",
}
SAMPLER_KEYS = {"counts", "sigma", "resample"}


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "heat"
    problem_params: dict = field(default_factory=dict)
    mode: str = "gspinn"
    generator: str | None = None
    arch: tuple = DEFAULT_ARCH
    counts: tuple = (500, 5000, 5000)
    sigma: float = 0.1
    resample: bool = False
    train: TrainConfig = TrainConfig()
    weights: LossWeights = LossWeights()
    seed: int = 0
    repeat: int = 1
    out: str = "runs/experiment"

    @property
    def seeds(self):
        return [self.seed + i for i in range(self.repeat)]

    @property
    def effective_counts(self):
        n0, nr, ns = self.counts
        return (n0, nr, 0 if self.mode == "pinn" else ns)

    def build_problem(self):
        return get_problem(self.problem, **self.problem_params)

    def to_dict(self):
        train = dataclasses.asdict(self.train)
        train.pop("seed")
        return {
            "problem": self.problem,
            "problem_params": dict(self.problem_params),
            "mode": self.mode,
            "generator": self.generator,
            "arch": list(self.arch),
            "sampler": {"counts": list(self.counts), "sigma": self.sigma, "resample": self.resample},
            "train": train,
            "weights": dataclasses.asdict(self.weights),
            "seed": self.seed,
            "repeat": self.repeat,
            "out": self.out,
        }

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- validation helpers --------------------------------------------------------


def _fail(key, msg):
    raise ConfigError(f"{key}: {msg}")


def _check_keys(section, data, allowed):
    if not isinstance(data, dict):
        _fail(section, "must be an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        _fail(f"{section}.{unknown[0]}" if section else unknown[0], f"unknown key (allowed: {sorted(allowed)})")


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _typed(key, value, kind):
    if kind == "int" and not _is_int(value):
        _fail(key, f"expected an integer, got {value!r}")
    if kind == "real" and not _is_real(value):
        _fail(key, f"expected a number, got {value!r}")
    if kind == "bool" and not isinstance(value, bool):
        _fail(key, f"expected true/false, got {value!r}")
    if kind == "str" and not isinstance(value, str):
        _fail(key, f"expected a string, got {value!r}")
    return float(value) if kind == "real" else value


def _field_kind(f):
    t = str(f.type)
    if "int" in t:
        return "int"
    if "float" in t:
        return "real"
    return "any"


def _dataclass_from(cls, section, data, skip=()):
    allowed = [f.name for f in dataclasses.fields(cls) if f.name not in skip]
    _check_keys(section, data, allowed)
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        v = data[f.name]
        if f.name == "e_stop" and v is None:
            kwargs[f.name] = None
            continue
        kwargs[f.name] = _typed(f"{section}.{f.name}", v, _field_kind(f))
    try:
        return cls(**kwargs)
    except GspinnError as exc:
        _fail(section, str(exc))


def _problem_params(name, params):
    sig = inspect.signature(PROBLEMS[name])
    _check_keys("problem_params", params, sig.parameters)
    out = {}
    for k, v in params.items():
        default = sig.parameters[k].default
        out[k] = _typed(f"problem_params.{k}", v, "int" if _is_int(default) else "real")
    try:
        get_problem(name, **out)
    except GspinnError as exc:
        _fail("problem_params", str(exc))
    return out


# -- public ----------------------------------------------------------------------


def config_from_dict(data):
    """Validate a parsed mapping and fill defaults."""
    _check_keys("", data, TOP_KEYS)
    if "problem" not in data:
        _fail("problem", "required key missing")
    problem = _typed("problem", data["problem"], "str")
    if problem not in PROBLEMS:
        _fail("problem", f"unknown problem {problem!r}; choose from {sorted(PROBLEMS)}")
    kw = {"problem": problem}
    kw["problem_params"] = _problem_params(problem, data.get("problem_params", {}))

    mode = _typed("mode", data.get("mode", "gspinn"), "str")
    if mode not in MODES:
        _fail("mode", f"must be one of {MODES}")
    kw["mode"] = mode

    gen = data.get("generator")
    if gen is not None:
        gen = _typed("generator", gen, "str")
        labels = get_problem(problem, **kw["problem_params"]).labels
        if gen not in labels:
            _fail("generator", f"unknown generator {gen!r}; choose from {labels}")
    kw["generator"] = gen

    if "arch" in data:
        arch = data["arch"]
        if not isinstance(arch, list) or len(arch) < 2 or not all(_is_int(a) and a > 0 for a in arch):
            _fail("arch", "expected a list of >= 2 positive integers")
        if arch[0] != 3 or arch[-1] != 1:
            _fail("arch", "input width must be 3 and output width 1")
        kw["arch"] = tuple(arch)

    sampler = data.get("sampler", {})
    _check_keys("sampler", sampler, SAMPLER_KEYS)
    if "counts" in sampler:
        c = sampler["counts"]
        if not isinstance(c, list) or len(c) != 3 or not all(_is_int(v) for v in c):
            _fail("sampler.counts", "expected [N_init, N_res, N_sym] integers")
        if min(c) < 0:
            _fail("sampler.counts", "counts must be >= 0")
        kw["counts"] = tuple(c)
    if "sigma" in sampler:
        s = _typed("sampler.sigma", sampler["sigma"], "real")
        if not (s > 0 and math.isfinite(s)):
            _fail("sampler.sigma", "sigma must be > 0")
        kw["sigma"] = s
    if "resample" in sampler:
        kw["resample"] = _typed("sampler.resample", sampler["resample"], "bool")

    kw["train"] = _dataclass_from(TrainConfig, "train", data.get("train", {}), skip=("seed",))
    kw["weights"] = _dataclass_from(LossWeights, "weights", data.get("weights", {}))

    for key in ("seed", "repeat"):
        if key in data:
            kw[key] = _typed(key, data[key], "int")
    if kw.get("seed", 0) < 0:
        _fail("seed", "must be >= 0")
    if kw.get("repeat", 1) < 1:
        _fail("repeat", "must be >= 1")
    if "out" in data:
        kw["out"] = _typed("out", data["out"], "str")
    return ExperimentConfig(**kw)


def parse_config(path):
    """Read and validate a JSON experiment file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    return config_from_dict(data)


def with_overrides(cfg, seed=None, out=None):
    kw = {}
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed: must be >= 0")
        kw["seed"] = seed
    if out is not None:
        kw["out"] = str(out)
    return dataclasses.replace(cfg, **kw)
