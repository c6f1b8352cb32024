"""Command-line driver: ``histlda {generate,fit,eval,benchmark}``.

Exit status is 0 on success, 2 for usage errors and 3 for data errors.
Every failure also writes one JSON line ``{"error": ..., "exit_code": ...}``
to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .gibbs import FitConfig, FitError, fit, unit_density
from .histogram import Range
from .io import DataError, ModelFile, load_model, model_json, read_collection, write_collection
from .numerics import make_rng

EXIT_USAGE = 2
EXIT_DATA = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _report(message, EXIT_USAGE)
        sys.exit(EXIT_USAGE)


def _report(message: str, code: int) -> None:
    sys.stderr.write(json.dumps({"error": message, "exit_code": code}) + "\n")


def _range(text: str) -> Range:
    try:
        t0, t1 = (float(x) for x in text.split(","))
        return Range(t0, t1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 't0,t1' with t0 < t1, got {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _writable(path: Path) -> None:
    parent = path.resolve().parent
    if not parent.is_dir():
        raise CliError(f"cannot write {path}: directory {parent} does not exist", EXIT_USAGE)


def _write(path: Path, text: str) -> None:
    _writable(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_USAGE) from exc


# ------------------------------------------------------------ commands


def cmd_generate(args) -> int:
    out = Path(args.out)
    spec = bench.SyntheticSpec(args.range, args.units, args.per_unit, seed=args.seed)
    c, weights = bench.generate_collection(spec, make_rng(args.seed))
    width = len(str(args.units))
    ids = tuple(f"u{u + 1:0{width}d}" for u in range(args.units))
    c = type(c)(c.range, c.t, c.unit, c.n_units, ids)
    _writable(out)
    try:
        write_collection(out, c)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror}", EXIT_USAGE) from exc
    sidecar = {
        "range": [spec.range.t0, spec.range.t1],
        "seed": args.seed,
        "components": ["normal(1, 0.1)", "exponential(2)", "uniform(1, 1.5)"],
        "units": [{"id": i, "weights": w.tolist()} for i, w in zip(ids, weights)],
    }
    _write(out.with_suffix(".weights.json"), json.dumps(sidecar, indent=1) + "\n")
    return 0


def cmd_fit(args) -> int:
    out = Path(args.out)
    _writable(out)
    try:
        c = read_collection(args.data, args.range)
    except OSError as exc:
        raise CliError(f"cannot read {args.data}: {exc.strerror}", EXIT_DATA) from exc
    except DataError as exc:
        raise CliError(f"{args.data}: {exc}", EXIT_DATA) from exc
    cfg = FitConfig(
        k_bases=args.k, w_max=args.w_max, burn_in_sweeps=args.sweeps, posterior_samples=args.np,
        alpha0=args.alpha0, beta0=args.beta0, hyper_update=not args.fix_hypers, seed=args.seed,
    )
    try:
        result = fit(c, cfg)
    except FitError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    model = ModelFile.from_result(result, c.unit_ids)
    _write(out, model_json(model))
    lj = float(result.log_joint_trace[-1]) if result.log_joint_trace.size else float("nan")
    print(f"log_joint {lj!r}")
    print(f"alpha {result.alpha_hat!r}")
    print(f"beta {result.beta_hat!r}")
    print("W " + " ".join(str(w) for w in result.w_hat))
    return 0


def cmd_eval(args) -> int:
    try:
        model = load_model(args.model)
    except OSError as exc:
        raise CliError(f"cannot read {args.model}: {exc.strerror}", EXIT_DATA) from exc
    except (DataError, ValueError) as exc:
        raise CliError(f"{args.model}: {exc}", EXIT_DATA) from exc
    if args.unit not in model.unit_ids:
        raise CliError(f"unknown unit id {args.unit!r}", EXIT_USAGE)
    if args.grid_points < 2:
        raise CliError("--grid-points must be >= 2", EXIT_USAGE)
    mix = unit_density(model.to_result(), model.unit_ids.index(args.unit) + 1)
    grid = model.range.grid(args.grid_points)
    values = mix(grid)
    lines = ["t,density"] + [f"{t!r},{v!r}" for t, v in zip(grid.tolist(), values.tolist())]
    _write(Path(args.out), "\n".join(lines) + "\n")
    return 0


def cmd_benchmark(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in bench.METHODS]
    if unknown or not methods:
        raise CliError(f"unknown method(s) {unknown}; valid names: {', '.join(bench.METHODS)}", EXIT_USAGE)
    prefix = Path(args.out_prefix)
    _writable(prefix.with_suffix(".json"))
    spec = bench.SyntheticSpec(args.range, args.units, seed=args.seed)
    cfg = FitConfig(
        k_bases=args.k, w_max=args.w_max, burn_in_sweeps=args.sweeps, posterior_samples=args.np, seed=args.seed,
    )
    report = bench.run_benchmark(
        spec, methods, args.m_list, args.replicates, cfg, n_jobs=args.jobs, record_runtime=args.timing,
    )
    _write(Path(f"{prefix}.json"), report.to_json())
    _write(Path(f"{prefix}.csv"), report.to_csv())
    for method in methods:
        cells = ", ".join(f"m={m}: {report.mean_ise(method, m):.5g}" for m in args.m_list if report.mean_ise(method, m) is not None)
        print(f"{method}: {cells}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="histlda", description="Histogram mixture density estimation by collapsed Gibbs sampling.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic three-component collection")
    g.add_argument("--units", type=_positive, required=True)
    g.add_argument("--per-unit", type=_positive, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--range", type=_range, default=Range(0.0, 2.0), help="t0,t1 (default 0,2)")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit a model to a unit_id,t CSV")
    f.add_argument("--data", required=True)
    f.add_argument("--k", type=_positive, default=3)
    f.add_argument("--w-max", type=_positive, default=200)
    f.add_argument("--sweeps", type=int, default=500, help="burn-in sweeps")
    f.add_argument("--np", type=_positive, default=100, help="posterior samples for the estimates")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True)
    f.add_argument("--range", type=_range, default=Range(0.0, 2.0), help="t0,t1 (default 0,2)")
    f.add_argument("--alpha0", type=float, default=0.5)
    f.add_argument("--beta0", type=float, default=0.5)
    f.add_argument("--fix-hypers", action="store_true", help="keep alpha and beta at their initial values")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="tabulate one unit's fitted density")
    e.add_argument("--model", required=True)
    e.add_argument("--unit", required=True, help="unit id as it appears in the data file")
    e.add_argument("--grid-points", type=int, default=2001)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("benchmark", help="ISE comparison on synthetic data")
    b.add_argument("--m-list", type=_int_list, default=[50, 100, 150, 200, 250, 300])
    b.add_argument("--units", type=_positive, default=100)
    b.add_argument("--replicates", type=_positive, default=3)
    b.add_argument("--methods", default=",".join(bench.METHODS))
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out-prefix", required=True)
    b.add_argument("--range", type=_range, default=Range(0.0, 2.0))
    b.add_argument("--k", type=_positive, default=3)
    b.add_argument("--w-max", type=_positive, default=200)
    b.add_argument("--sweeps", type=int, default=500)
    b.add_argument("--np", type=_positive, default=100)
    b.add_argument("--jobs", type=_positive, default=1)
    b.add_argument("--timing", action="store_true", help="record wall-clock runtime_ms (output no longer reproducible)")
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "sweeps", 0) < 0:
        _report("--sweeps must be >= 0", EXIT_USAGE)
        return EXIT_USAGE
    try:
        return args.func(args)
    except CliError as exc:
        _report(str(exc), exc.code)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
