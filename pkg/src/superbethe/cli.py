"""``superbethe`` command line: check, bv, solve, bench.

Exit codes: 0 success, 1 an identity failed, 2 bad input (configuration, parameters, poles).
"""

from __future__ import annotations

import argparse
import json
import random
import statistics
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np
from gmpy2 import mpq

from . import bethe as B
from .errors import ConfigError, PoleError, SizeGuard, SuperBetheError
from .graded import GradedMatrix, GradedSpace, from_coefficients, graded_kron, supertrace
from .kernels import BACKENDS, EXACT, FLOAT, format_scalar, parse_scalar
from .lattice import ModelSpec, MonodromyFamily
from .onshell import solve_bethe, verify_onshell
from .suites import DEFAULT_MODEL, Z_SAMPLES, SuiteConfig, run_suites

__all__ = ["main", "FORMULAS", "compute_bv", "max_difference", "bench", "load_bench_report"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _form(name: str) -> Callable:
    return lambda fam, d: B.bv_explicit(fam, d, name)[1]


def _dual_form(name: str) -> Callable:
    return lambda fam, d: B.dual_explicit(fam, d, name)[1]


FORMULAS: dict[str, Callable] = {
    "supertrace": B.bv_supertrace,
    "tv": B.bv_tv,
    "rec-u": lambda fam, d: B.bv_recursive(fam, d, "rec-u"),
    "rec-v": lambda fam, d: B.bv_recursive(fam, d, "rec-v"),
    "explicit-x": _form("X"),
    "explicit-y": _form("Y"),
    "dual-supertrace": B.dual_supertrace,
    "dual-rec-21": lambda fam, d: B.dual_recursive(fam, d, "rec-21"),
    "dual-rec-32": lambda fam, d: B.dual_recursive(fam, d, "rec-32"),
    "dual-explicit-1": _dual_form("X"),
    "dual-explicit-2": _dual_form("Y"),
}


# ---------------------------------------------------------------- input helpers

def _read_json(source: str, what: str):
    """Parse JSON from a file path, or from the argument itself when it looks like an object."""
    text = source if source.lstrip().startswith("{") else None
    if text is None:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {what} {source!r}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} JSON line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_model(source: str | None, backend: str | None = None) -> ModelSpec:
    data = dict(DEFAULT_MODEL) if source is None else _read_json(source, "model")
    if not isinstance(data, dict):
        raise ConfigError("model JSON must be an object")
    if backend is not None:
        data = {**data, "backend": backend}
    return ModelSpec.from_dict(data)


def parse_params(text: str | None, backend: str) -> tuple | None:
    """``"1/2,3"`` or a JSON list such as ``["1/2", [0.5, 1.0]]``; ``None`` means draw at random."""
    if text is None:
        return None
    s = text.strip()
    if not s:
        return ()
    try:
        items = json.loads(s) if s.startswith("[") else [t for t in s.split(",")]
        return tuple(parse_scalar(x, backend) for x in items)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse Bethe parameters {text!r}: {exc}") from None


def _bethe_data(model: ModelSpec, a: int, b: int, u, v, seed: int) -> B.BetheData:
    if a < 0 or b < 0:
        raise ConfigError("--a and --b must be nonnegative")
    if u is None or v is None:
        exact = model.backend == EXACT
        drawn = B.draw_bethe_data(random.Random(seed), a, b, model.c if exact else 1,
                                  avoid=model.z if exact else ())
        u = drawn.u if u is None else u
        v = drawn.v if v is None else v
    if len(u) != a or len(v) != b:
        raise ConfigError(f"expected {a} u-parameters and {b} v-parameters, got {len(u)} and {len(v)}")
    return B.BetheData(u, v, model.c).to_backend(model.backend)


def _emit(payload, out: str | None):
    text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- bv

def compute_bv(model: ModelSpec, data: B.BetheData, formula: str):
    if formula not in FORMULAS:
        raise ConfigError(f"unknown formula {formula!r}; choose from {sorted(FORMULAS)}")
    return FORMULAS[formula](MonodromyFamily(model), data)


def max_difference(x, y):
    """Exact (or float) largest componentwise |x - y|."""
    d = x - y
    if d.backend == EXACT:
        return mpq(max((abs(t) for t in d.entries), default=0))
    return d.max_abs()


def _exact_text(q) -> str:
    return f"{q.numerator}/{q.denominator}"


def cmd_bv(args) -> int:
    model = load_model(args.model, args.backend)
    data = _bethe_data(model, args.a, args.b, parse_params(args.u, model.backend),
                       parse_params(args.v, model.backend), args.seed)
    vec = compute_bv(model, data, args.formula)
    payload = {
        "formula": args.formula, "a": args.a, "b": args.b, "side": vec.side,
        "u": [format_scalar(x) for x in data.u], "v": [format_scalar(x) for x in data.v],
        "vector": [{"basis": lab, "value": format_scalar(x)} for lab, x in vec.components()],
    }
    if args.diff:
        other = compute_bv(model, data, args.diff)
        if other.side != vec.side:
            raise ConfigError(f"{args.formula} and {args.diff} live on different sides")
        delta = max_difference(vec, other)
        payload["diff"] = {"against": args.diff,
                           "max": _exact_text(delta) if model.backend == EXACT else float(delta)}
        if args.out:
            _emit(payload, args.out)
        print(payload["diff"]["max"])
        return EXIT_OK
    _emit(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- check

def load_config(path: str | None, seed: int | None, model: str | None) -> SuiteConfig:
    data = {} if path is None else _read_json(path, "config")
    if not isinstance(data, dict):
        raise ConfigError("config JSON must be an object")
    if seed is not None:
        data = {**data, "seed": seed}
    if model is not None:
        data = {**data, "model": _read_json(model, "model")}
    return SuiteConfig.from_dict(data)


def cmd_check(args) -> int:
    cfg = load_config(args.config, args.seed, args.model)
    report = run_suites(cfg)
    _emit(report, args.out)
    for row in report["results"]:
        if not row["passed"]:
            print(f"FAILED {row['identity']}: residual {row['max_residual']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    model = load_model(args.model, FLOAT)
    fam = MonodromyFamily(model)
    sols = solve_bethe(fam, args.a, args.b, attempts=args.attempts, tol=args.tol, seed=args.seed)
    rows = []
    for s in sols:
        row = s.to_dict()
        rep = verify_onshell(fam, s, Z_SAMPLES)
        row["tau_check"] = rep.ratio
        row["null_vector"] = rep.null_vector
        rows.append(row)
    _emit(rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- bench

def _random_operator(space: GradedSpace, backend: str, rng: np.random.Generator) -> GradedMatrix:
    ints = rng.integers(-9, 10, size=(space.dim, space.dim))
    if backend == EXACT:
        coeffs = np.vectorize(lambda k: mpq(int(k)), otypes=[object])(ints)
    else:
        coeffs = ints.astype(np.complex128)
    return from_coefficients(space, coeffs)


def _timed(fn, reps: int) -> dict:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return {"reps": reps, "min": min(times), "mean": statistics.fmean(times)}


def bench(dims: int = 4, reps: int = 3, seed: int = 0) -> dict:
    """Wall times of the dense kernels on both backends; ``dims`` is the number of (2|1) factors."""
    if not 1 <= dims <= B.MAX_DENSE_FACTORS - 1:
        raise ConfigError(f"--dims must lie in 1..{B.MAX_DENSE_FACTORS - 1}")
    if reps < 1:
        raise ConfigError("--reps must be positive")
    rng = np.random.default_rng(seed)
    model = ModelSpec.from_dict({**DEFAULT_MODEL, "L": 2})
    rows = []
    for backend in BACKENDS:
        gr = model.grading
        one = GradedSpace.power(gr, 1)
        rest = GradedSpace.power(gr, dims - 1) if dims > 1 else None
        A = _random_operator(one, backend, rng)
        Bop = _random_operator(rest, backend, rng) if rest else None
        big = graded_kron(A, Bop) if Bop is not None else A
        fam = MonodromyFamily(model.to_backend(backend))
        data = B.draw_bethe_data(random.Random(seed), 2, 2, 1, avoid=model.z).to_backend(backend)
        kernels = {
            "graded_kron": (lambda: graded_kron(A, Bop)) if Bop is not None else (lambda: A),
            "supertrace": lambda: supertrace(big),
            "bv_supertrace_2_2": lambda: B.bv_supertrace(fam, data),
        }
        for name, fn in kernels.items():
            rows.append({"kernel": name, "backend": backend, "factors": dims if name != "bv_supertrace_2_2" else 6,
                         **_timed(fn, reps)})
    return {"dims": dims, "reps": reps, "timings": rows}


BENCH_KEYS = {"kernel": str, "backend": str, "factors": int, "reps": int, "min": float, "mean": float}


def load_bench_report(text: str) -> dict:
    """Parse and validate a bench report."""
    data = json.loads(text)
    if set(data) != {"dims", "reps", "timings"}:
        raise ConfigError(f"bench report keys {sorted(data)} do not match the schema")
    for row in data["timings"]:
        if set(row) != set(BENCH_KEYS) or not all(isinstance(row[k], t) for k, t in BENCH_KEYS.items()):
            raise ConfigError(f"malformed bench row {row!r}")
    return data


def cmd_bench(args) -> int:
    _emit(bench(args.dims, args.reps, args.seed), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="superbethe", description="Bethe vectors of the super-Yangians Y(2|1), Y(1|2).")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_default=0):
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("--out", help="write JSON here instead of stdout")

    c = sub.add_parser("check", help="run identity suites")
    c.add_argument("--config", help="suite configuration JSON file")
    c.add_argument("--model", help="model JSON (file or inline), overrides the config's model")
    common(c, seed_default=None)
    c.set_defaults(func=cmd_check)

    bv = sub.add_parser("bv", help="compute one Bethe vector")
    bv.add_argument("--model", help="model JSON (file or inline); default is the (2|1) chain with L=2")
    bv.add_argument("--a", type=int, default=1)
    bv.add_argument("--b", type=int, default=1)
    bv.add_argument("--u", help="comma-separated rationals or a JSON list; drawn at random if absent")
    bv.add_argument("--v", help="same format as --u")
    bv.add_argument("--formula", default="supertrace", choices=sorted(FORMULAS))
    bv.add_argument("--diff", choices=sorted(FORMULAS), help="print the max difference to this formula")
    bv.add_argument("--backend", choices=BACKENDS)
    common(bv)
    bv.set_defaults(func=cmd_bv)

    s = sub.add_parser("solve", help="solve Bethe equations on the float backend")
    s.add_argument("--model", help="model JSON (file or inline)")
    s.add_argument("--a", type=int, default=1)
    s.add_argument("--b", type=int, default=0)
    s.add_argument("--attempts", type=int, default=200)
    s.add_argument("--tol", type=float, default=1e-12)
    common(s)
    s.set_defaults(func=cmd_solve)

    bn = sub.add_parser("bench", help="time dense kernels")
    bn.add_argument("--dims", type=int, default=4)
    bn.add_argument("--reps", type=int, default=3)
    common(bn)
    bn.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PoleError, SizeGuard) as exc:
        pair = getattr(exc, "pair", None)
        extra = f" (parameters {format_scalar(pair[0])}, {format_scalar(pair[1])})" if pair else ""
        print(f"error: {exc}{extra}", file=sys.stderr)
        return EXIT_CONFIG
    except SuperBetheError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
