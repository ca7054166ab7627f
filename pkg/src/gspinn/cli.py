"""Command-line entry point ``gspinn``.

Exit codes: 0 ok, 1 check failed, 2 symmetry check failed, 3 unknown
reference (problem or generator label), 4 unsupported operation,
5 configuration or input error.
"""
from __future__ import annotations

import argparse
import contextlib
import sys

import numpy as np

from . import problems as P
from .config import parse_config, with_overrides
from .errors import ConfigError, DomainError, FormatError, UsageError
from .network import load_params
from .symmetry import check_green_invariance, combine, solve_generator_combination

EXIT_OK, EXIT_FAIL, EXIT_SYMMETRY, EXIT_UNKNOWN, EXIT_UNSUPPORTED, EXIT_CONFIG = 0, 1, 2, 3, 4, 5
COMPOSE_TOL = 1e-5
CAUCHY_TOL = 1e-6
DEFAULT_COMBINATIONS = {"heat": (("v2", "v3", "v1"), ("v3", "v1")), "diffusion": (("v3", "v0"), ("v0",))}


class _Exit(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Exit(EXIT_CONFIG, f"{self.prog}: error: {message}")


def _deterministic():
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=1)


def _problem(args):
    if getattr(args, "config", None):
        cfg = parse_config(args.config)
        return cfg.build_problem()
    if args.problem not in P.PROBLEMS:
        raise _Exit(EXIT_UNKNOWN, f"unknown problem {args.problem!r}; choose from {sorted(P.PROBLEMS)}")
    return P.get_problem(args.problem)


def _parse_coef(text):
    """'1.5', '-y', 'y', '2*y' or '-0.5y' -> float or a function of y."""
    s = text.strip().replace(" ", "")
    if s.endswith("y"):
        head = s[:-1].rstrip("*")
        a = {"": 1.0, "+": 1.0, "-": -1.0}.get(head)
        if a is None:
            a = float(head)
        return lambda y, a=a: a * y
    return float(s)


def _generator(problem, args):
    if args.coefficients:
        terms = []
        for part in args.coefficients.split(","):
            label, _, coef = part.partition(":")
            label = label.strip()
            if label not in problem.labels:
                raise _Exit(EXIT_UNKNOWN, f"unknown generator {label!r}; choose from {problem.labels}")
            try:
                terms.append((_parse_coef(coef or "1"), problem.generator(label)))
            except ValueError:
                raise _Exit(EXIT_CONFIG, f"bad coefficient {coef!r} for {label}") from None
        return combine(terms, args.coefficients)
    label = args.generator or "invariant"
    if label not in problem.labels:
        raise _Exit(EXIT_UNKNOWN, f"unknown generator {label!r}; choose from {problem.labels}")
    return problem.generator(label)


def _y_samples(problem, n=9):
    d = problem.domain
    return np.linspace(d.x_lo, d.x_hi, n)


# -- verbs ---------------------------------------------------------------------


def cmd_train(args):
    if not args.config:
        raise _Exit(EXIT_CONFIG, "train requires --config")
    from .experiment import run_experiment

    cfg = with_overrides(parse_config(args.config), args.seed, args.out)
    rows = run_experiment(cfg)
    print(f"config_hash {cfg.config_hash()}")
    for r in rows:
        sym = "/" if r.loss_sym is None else f"{r.loss_sym:.3e}"
        print(f"{r.algorithm} seed={r.seed} mse={r.mse:.3e} loss_init={r.loss_init} "
              f"loss_res={r.loss_res} loss_sym={sym} time_s={r.time_s:.1f} stop={r.stop_reason}")
    return EXIT_OK if all(np.isfinite(r.mse) for r in rows) else EXIT_FAIL


def cmd_eval(args):
    if not args.config or not args.params:
        raise _Exit(EXIT_CONFIG, "eval requires --config and --params")
    from .training import evaluate_mse

    cfg = parse_config(args.config)
    params = load_params(args.params, cfg.arch)
    print(f"mse {evaluate_mse(params, cfg.build_problem()):.6e}")
    return EXIT_OK


def cmd_verify_symmetry(args):
    problem = _problem(args)
    gen = _generator(problem, args)
    report = check_green_invariance(gen, _y_samples(problem))
    print(f"{problem.name} {gen.label}")
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_SYMMETRY


def cmd_solve_coefficients(args):
    problem = _problem(args)
    basis_labels, free_labels = DEFAULT_COMBINATIONS[problem.name]
    if args.basis:
        basis_labels = tuple(s.strip() for s in args.basis.split(","))
        free_labels = tuple(s.strip() for s in (args.free or "").split(",") if s.strip())
    for lab in basis_labels + free_labels:
        if lab not in problem.labels:
            raise _Exit(EXIT_UNKNOWN, f"unknown generator {lab!r}; choose from {problem.labels}")
    if not set(free_labels) <= set(basis_labels):
        raise _Exit(EXIT_CONFIG, "--free labels must be a subset of --basis")
    basis = [problem.generator(lab) for lab in basis_labels]
    free = [basis_labels.index(lab) for lab in free_labels]
    res = solve_generator_combination(basis, free, _y_samples(problem))
    print(res.message)
    print(f"residual {res.residual:.3e}")
    for lab, (c0, c1) in zip(free_labels, res.affine_fit):
        print(f"{lab}: {c0:+.6f} {c1:+.6f}*y")
    return EXIT_OK if res.found else EXIT_SYMMETRY


def cmd_compose_check(args):
    problem = _problem(args)
    if problem.name != "heat":
        raise _Exit(EXIT_UNSUPPORTED, "compose-check supports only the heat problem "
                    "(no bounded quadrature window for the diffusion kernel)")
    kern = lambda t, x, y: P.heat_kernel_exact(t, x, y, 1, problem.kappa)
    g = np.linspace(-2.0, 2.0, 9)
    X, Y = np.meshgrid(g, g)
    composed = P.compose_kernel(kern, args.t1, args.t2, X, Y, args.nodes)
    err = float(np.max(np.abs(composed - kern(args.t1 + args.t2, X, Y))))
    print(f"max_abs_error {err:.3e}")
    return EXIT_OK if err <= COMPOSE_TOL else EXIT_FAIL


def cmd_cauchy_solve(args):
    problem = _problem(args)
    if problem.name != "heat":
        raise _Exit(EXIT_UNSUPPORTED, "cauchy-solve supports only the heat problem")
    s2, k = args.sigma**2, problem.kappa
    if not args.sigma > 0:
        raise _Exit(EXIT_CONFIG, "--sigma must be > 0")
    u0 = lambda y: np.exp(-((y - args.mu) ** 2) / (2 * s2)) / np.sqrt(2 * np.pi * s2)
    kern = lambda t, x, y: P.heat_kernel_exact(t, x, y, 1, k)
    x = np.linspace(-2.0, 2.0, args.points)
    u = P.cauchy_solve(kern, u0, args.t, x, args.nodes)
    v = s2 + 2 * k * args.t
    exact = np.exp(-((x - args.mu) ** 2) / (2 * v)) / np.sqrt(2 * np.pi * v)
    for xi, ui in zip(x, u):
        print(f"{xi:+.4f} {ui:.10e}")
    err = float(np.max(np.abs(u - exact)))
    print(f"max_abs_error {err:.3e}")
    return EXIT_OK if err <= CAUCHY_TOL else EXIT_FAIL


# -- parser ----------------------------------------------------------------------


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--deterministic", action="store_true", help="single-threaded BLAS")

    p = _Parser(prog="gspinn", description="Symmetry-guided PINN kernels for linear PDEs.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("train", parents=[common], help="run the experiment in --config")
    s.set_defaults(fn=cmd_train)
    s = sub.add_parser("eval", parents=[common], help="test MSE of a saved parameter file")
    s.add_argument("--params", metavar="FILE")
    s.set_defaults(fn=cmd_eval)
    for name, fn, help_ in (
        ("verify-symmetry", cmd_verify_symmetry, "check a generator against the delta initial datum"),
        ("solve-coefficients", cmd_solve_coefficients, "find the invariant generator combination"),
        ("compose-check", cmd_compose_check, "semigroup check of the heat kernel"),
        ("cauchy-solve", cmd_cauchy_solve, "propagate a Gaussian datum by quadrature"),
    ):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--problem", default="heat")
        s.set_defaults(fn=fn)
        if name == "verify-symmetry":
            s.add_argument("--generator", help="catalog label, e.g. v2 or invariant")
            s.add_argument("--coefficients", help="e.g. 'v2:1,v3:-1,v1:-y'")
        elif name == "solve-coefficients":
            s.add_argument("--basis", help="comma-separated labels, e.g. v2,v3,v1")
            s.add_argument("--free", help="labels whose multipliers are solved for")
        elif name == "compose-check":
            s.add_argument("--t1", type=float, default=0.5)
            s.add_argument("--t2", type=float, default=0.5)
            s.add_argument("--nodes", type=int, default=400)
        elif name == "cauchy-solve":
            s.add_argument("--t", type=float, default=0.5)
            s.add_argument("--sigma", type=float, default=0.1)
            s.add_argument("--mu", type=float, default=0.0)
            s.add_argument("--points", type=int, default=9)
            s.add_argument("--nodes", type=int, default=400)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        ctx = _deterministic() if args.deterministic else contextlib.nullcontext()
        with ctx:
            return args.fn(args)
    except _Exit as exc:
        if str(exc):
            print(str(exc), file=sys.stderr)
        return exc.code
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
