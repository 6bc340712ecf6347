"""Command-line entry point: ``bcnorm {analyze,synth,transform,curve}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .boxcox import BoxCoxParams, LambdaSearchConfig, Objective, kurtosis_curve, transform_series
from .ingest import ROLES, column, load_csv, write_csv
from .model_fit import DEFAULT_BINS
from .report import REPORT_NAME, build_report, write_outputs
from .stats_core import Series
from .synth import EMPLOYEES_DEFAULT, SALE_DEFAULT, BivariateSpec, LogNormalSpec, generate_bivariate_lognormal

log = logging.getLogger("bcnorm")

OUTPUT_ENV = "BCNORM_OUTPUT_DIR"
DEFAULT_OUTPUT = "bcnorm-out"
DEFAULT_SEED = 42
DEFAULT_RHO = 0.873
OBJECTIVES = {"kurtosis": Objective.KURTOSIS_TO_3, "skewness": Objective.ABS_SKEWNESS}


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", help="CSV file to analyse; synthetic data is used when omitted")
    p.add_argument("--col-employees", default="employees", help="header of the employees column")
    p.add_argument("--col-sale", default="sale", help="header of the sale column")
    _add_synth_flags(p)


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for synthetic data")
    p.add_argument("--n", type=int, default=EMPLOYEES_DEFAULT.n, help="synthetic sample size")
    p.add_argument("--rho", type=float, default=DEFAULT_RHO, help="correlation of the underlying normals")
    p.add_argument("--employees-mu", type=float, default=EMPLOYEES_DEFAULT.mu)
    p.add_argument("--employees-sigma2", type=float, default=EMPLOYEES_DEFAULT.sigma2)
    p.add_argument("--sale-mu", type=float, default=SALE_DEFAULT.mu)
    p.add_argument("--sale-sigma2", type=float, default=SALE_DEFAULT.sigma2)


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    d = LambdaSearchConfig()
    p.add_argument("--lambda-min", type=float, default=d.lambda_min)
    p.add_argument("--lambda-max", type=float, default=d.lambda_max)
    p.add_argument("--grid-steps", type=int, default=d.grid_steps)
    p.add_argument("--tolerance", type=float, default=d.refine_tolerance, help="golden-section tolerance")
    p.add_argument("--objective", choices=sorted(OBJECTIVES), default="kurtosis")
    p.add_argument("--shift", type=float, default=0.0, help="constant added before transforming")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcnorm", description="Box-Cox normalisation with kurtosis-based lambda selection"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline: lambda search, fits, correlations, plot scripts")
    _add_input_flags(p)
    _add_search_flags(p)
    p.add_argument("--columns", nargs="+", choices=ROLES, default=list(ROLES))
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--output", "-o", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    p.set_defaults(func=run_analyze)

    p = sub.add_parser("synth", help="write a synthetic employees/sale CSV")
    _add_synth_flags(p)
    p.add_argument("--output", "-o", required=True, help="CSV file to write")
    p.set_defaults(func=run_synth)

    p = sub.add_parser("transform", help="apply a given lambda and print the transformed values")
    p.add_argument("--lambda", dest="lmbda", type=float, required=True)
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("values", nargs="*", type=float, help="values to transform (else --input)")
    p.add_argument("--input", "-i")
    p.add_argument("--column", choices=ROLES, default="employees")
    p.add_argument("--col-employees", default="employees")
    p.add_argument("--col-sale", default="sale")
    p.set_defaults(func=run_transform)

    p = sub.add_parser("curve", help="print kurtosis as a function of lambda")
    _add_input_flags(p)
    _add_search_flags(p)
    p.add_argument("--column", choices=ROLES, default="employees")
    p.set_defaults(func=run_curve)
    return parser


def _bivariate_spec(args) -> BivariateSpec:
    return BivariateSpec(
        spec_x=LogNormalSpec(args.employees_mu, args.employees_sigma2, args.n, args.seed),
        spec_y=LogNormalSpec(args.sale_mu, args.sale_sigma2, args.n, args.seed),
        rho=args.rho,
        seed=args.seed,
    )


def _load(args, roles) -> tuple[dict[str, Series], dict]:
    """Selected columns plus a provenance record."""
    if args.input:
        mapping = {"employees": args.col_employees, "sale": args.col_sale}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            ds = load_csv(args.input, {r: mapping[r] for r in roles})
        for w in caught:
            _warn(str(w.message))
        series = {r: column(ds, r) for r in roles}
        return series, {"source": {"kind": "csv", "path": str(args.input), "records": len(ds), "dropped": ds.dropped}}
    spec = _bivariate_spec(args)
    x, y = generate_bivariate_lognormal(spec, labels=ROLES)
    pool = dict(zip(ROLES, (x, y)))
    prov = {
        "source": {
            "kind": "synthetic",
            "model": "bivariate log-normal stand-in for firm-size data",
            "spec": spec.as_dict(),
        }
    }
    return {r: pool[r] for r in roles}, prov


def _search_config(args) -> LambdaSearchConfig:
    return LambdaSearchConfig(
        lambda_min=args.lambda_min,
        lambda_max=args.lambda_max,
        grid_steps=args.grid_steps,
        refine_tolerance=args.tolerance,
        objective=OBJECTIVES[args.objective],
        shift=args.shift,
    )


def run_analyze(args) -> int:
    out = Path(args.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
    # a report left over from an earlier run must not outlive a failed one
    (out / REPORT_NAME).unlink(missing_ok=True)
    roles = list(dict.fromkeys(args.columns))
    cfg = _search_config(args)
    series, prov = _load(args, roles)
    report = build_report(series, cfg, bins=args.bins, provenance=prov)
    report, path = write_outputs(report, out)
    for name, col in report.columns.items():
        opt = col.optimum
        flag = "  [boundary optimum]" if opt.boundary else ""
        print(f"{name}: lambda_c={opt.lmbda:.6f} kurtosis={opt.kurtosis_at_optimum:.4f}{flag}")
        if opt.boundary:
            _warn(f"{name}: optimum lies on the search boundary; widen --lambda-min/--lambda-max")
    if report.pair is not None:
        print(f"pearson raw={report.pearson_raw:.4f} transformed={report.pearson_transformed:.4f}")
    print(f"report: {path}")
    return 0


def run_synth(args) -> int:
    spec = _bivariate_spec(args)
    x, y = generate_bivariate_lognormal(spec, labels=ROLES)
    out = Path(args.output)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, {"employees": x, "sale": y})
    print(json.dumps({"output": str(out), "spec": spec.as_dict()}, sort_keys=False))
    return 0


def run_transform(args) -> int:
    p = BoxCoxParams(args.lmbda, args.shift)
    if args.values:
        s = Series(args.values)
    elif args.input:
        series, _ = _load(args, [args.column])
        s = series[args.column]
    else:
        raise ValueError("give values on the command line or --input")
    for v in transform_series(s, p):
        print(repr(v))
    return 0


def run_curve(args) -> int:
    series, _ = _load(args, [args.column])
    print("# lambda\tkurtosis")
    for lam, kurt in kurtosis_curve(series[args.column], _search_config(args)):
        print(f"{lam!r}\t{kurt!r}")
    return 0


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _error_line(exc: BaseException) -> str:
    info = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("lmbda", "index", "required_shift"):
        if getattr(exc, attr, None) is not None:
            info[attr] = getattr(exc, attr)
    return "error: " + json.dumps(info)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(_error_line(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
