"""Command-line interface.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dof import df_for_fit
from .errors import ConfigError, LassoDfError, NumericalError
from .experiments import (BUCKETS, DF_CURVE_HEADER, METHODS, SNR_DEFINITIONS,
                          SyntheticSpec, method_penalty, run_dataset_pipeline,
                          run_table1, run_unbiasedness, unbiasedness_gammas)
from .io import read_dataset, read_groups, write_csv, write_json
from .model import (ExponentialDecay, Fixed, GroupInverseNorm, InversePower,
                    standardize)
from .oracle import DEFAULT_SEED
from .parallel import default_jobs
from .selection import criteria, estimate_sigma2, naive_df
from .solvers import SolverConfig, fit_penalty

log = logging.getLogger("lassodf")

PENALTIES = ("lasso", "adaptive", "group", "adaptive-group")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def scheme_factory(text: str | None, penalty: str):
    """Turn a --weights value into ``(p, groups) -> scheme`` (or None for defaults)."""
    if text is None:
        return None
    kind, _, arg = text.partition(":")
    alpha = None
    if arg:
        try:
            alpha = float(arg)
        except ValueError:
            raise ConfigError(f"bad weight parameter in {text!r}") from None
    if kind in ("inv-power", "exp") and alpha is None:
        raise ConfigError(f"{kind} weights need a parameter, e.g. {kind}:1")
    if kind not in ("fixed", "inv-power", "exp", "group-inv-norm"):
        raise ConfigError(f"unknown weight scheme {text!r}")
    if penalty in ("lasso", "group"):
        if kind != "fixed":
            raise ConfigError(f"penalty {penalty!r} only takes fixed weights")
        return None
    if penalty == "adaptive-group" and kind in ("inv-power", "exp"):
        raise ConfigError("adaptive-group takes fixed or group-inv-norm weights")

    def make(p, groups):
        if kind == "fixed":
            if penalty == "adaptive":
                return Fixed(np.ones(p))
            return Fixed(np.sqrt(groups.sizes))
        if kind == "group-inv-norm":
            return InversePower(1.0) if penalty == "adaptive" else GroupInverseNorm()
        return InversePower(alpha) if kind == "inv-power" else ExponentialDecay(alpha)
    return make


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(max_iterations=args.max_iterations, tol=args.tol,
                            grid_size=getattr(args, "grid_size", 100),
                            grid_decades=getattr(args, "grid_decades", 4.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _load(args):
    data, names = read_dataset(args.data, args.response)
    groups = read_groups(args.groups, data.p) if args.groups else None
    return data, names, groups


def _echo(args) -> dict:
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _versions() -> dict:
    import numba
    import scipy
    return {"lassodf": __version__, "numba": numba.__version__,
            "numpy": np.__version__, "python": sys.version.split()[0],
            "scipy": scipy.__version__}


def _manifest(out: Path, command: str, args, artifacts: list, extra: dict | None = None):
    man = {"command": command, "config": _echo(args), "version": __version__,
           "versions": _versions(), "seed": getattr(args, "seed", None),
           "artifacts": sorted(artifacts + ["manifest.json"])}
    if extra:
        man.update(extra)
    write_json(out / "manifest.json", man)


def cmd_fit(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw, names, groups = _load(args)
    if args.penalty in ("group", "adaptive-group") and groups is None:
        raise ConfigError(f"--penalty {args.penalty} needs --groups")
    factory = scheme_factory(args.weights, args.penalty)
    scheme = factory(raw.p, groups) if factory else None
    pen = method_penalty(args.penalty, groups, scheme)
    data = standardize(raw, orthonormalize=args.orthonormalize)
    config = _solver_config(args)
    if not args.gamma > 0:
        raise ConfigError("--gamma must be positive")
    fit = fit_penalty(data, pen, args.gamma, config)
    dof = df_for_fit(fit, data, pen)
    intercept, coef = data.destandardize(fit.beta)
    result = {
        "penalty": args.penalty, "gamma": fit.gamma, "columns": names,
        "beta_standardized": fit.beta, "intercept": intercept, "beta_raw": coef,
        "active_variables": [int(j) + 1 for j in fit.active.A_p],
        "active_groups": [int(g) + 1 for g in fit.active.A_G],
        "kkt_residual": fit.kkt_residual, "converged": fit.converged,
        "iterations": fit.iterations, "weights": fit.weights,
        "df": {"value": dof.value, "base_active": dof.base_active,
               "group_active": dof.group_active, "correction": dof.correction,
               "contraction": dof.contraction, "inflation": dof.inflation,
               "method": dof.method},
    }
    if data.n > data.p:
        s2 = estimate_sigma2(data)
        ca = criteria(fit, dof.value, s2, data, "analytic")
        cn = criteria(fit, naive_df(fit), s2, data, "active_set")
        result["sigma2_estimate"] = s2
        result["criteria"] = {"aic": ca.aic, "bic": ca.bic, "rss": ca.rss,
                              "aic_naive": cn.aic, "bic_naive": cn.bic}
    write_json(out / "fit.json", result)
    _manifest(out, "fit", args, ["fit.json"])
    return 0 if fit.converged else 3


def _write_pipeline(out: Path, report, args, command: str) -> None:
    write_csv(out / "df_curve.csv", DF_CURVE_HEADER, report.df_curve_rows())
    write_csv(out / "path.csv", ["gamma"] + report.column_names,
              ([g] + list(b) for g, b in zip(report.gammas, report.betas)))
    sel = {"selections": report.selections, "sigma2_estimate": report.sigma2,
           "sigma2_source": "ols_residual"}
    artifacts = ["df_curve.csv", "path.csv", "selection.json"]
    if report.cv_error is not None:
        write_csv(out / "cv_curve.csv", ["gamma", "log_gamma", "cv_error"],
                  ((g, float(np.log(g)), e) for g, e in zip(report.gammas, report.cv_error)))
        artifacts.append("cv_curve.csv")
    write_json(out / "selection.json", sel)
    grid = {"gamma_max": float(report.gammas[0]), "gamma_min": float(report.gammas[-1]),
            "size": int(len(report.gammas))}
    _manifest(out, command, args, artifacts,
              {"grid": grid, "selections": report.selections})


def cmd_path(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw, names, groups = _load(args)
    report = run_dataset_pipeline(
        raw, args.penalty, grouped=args.grouped, config=_solver_config(args),
        cv=args.cv, groups=groups, column_names=names, levels=args.levels,
        criterion=args.criterion, scheme=scheme_factory(args.weights, args.penalty))
    _write_pipeline(out, report, args, "path" if args.func is cmd_path else "experiment dataset")
    return 0


def cmd_unbiasedness(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = SyntheticSpec(n=args.n, p=args.p, snr=args.snr, B=args.B, seed=args.seed,
                         group_size=args.group_size, snr_definition=args.snr_definition)
    config = _solver_config(args)
    rows = []
    for m in args.methods:
        gammas = unbiasedness_gammas(spec, m)
        for r in run_unbiasedness(spec, gammas, m, config, args.jobs):
            rows.append((m, r.gamma, r.mean_df, r.se_df, r.cov_df, r.se_cov,
                         r.se_diff, r.z, r.replicates))
    write_csv(out / "unbiasedness.csv",
              ["method", "gamma", "mean_df_analytic", "se_df_analytic", "df_covariance",
               "se_covariance", "se_difference", "z", "replicates"], rows)
    _manifest(out, "experiment unbiasedness", args, ["unbiasedness.csv"],
              {"spec": spec.as_dict()})
    return 0


def cmd_table1(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = SyntheticSpec(n=args.n, p=args.p, snr=args.snr, B=args.B, seed=args.seed,
                         group_size=args.group_size, snr_definition=args.snr_definition)
    config = _solver_config(args)
    hists = run_table1(spec, args.B, config, args.jobs, tuple(args.methods))
    rows = [(m, b, h.counts[b]) for m, h in hists.items() for b in BUCKETS]
    write_csv(out / "table1.csv", ["method", "bucket", "count"], rows)
    failures = {m: h.failures for m, h in hists.items()}
    _manifest(out, "experiment table1", args, ["table1.csv"],
              {"spec": spec.as_dict(), "failures": failures,
               "grid": {"size": config.grid_size, "decades": config.grid_decades}})
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--tol", type=float, default=1e-8, help="KKT tolerance")
    p.add_argument("--max-iterations", type=int, default=10000)
    p.add_argument("-v", "--verbose", action="store_true")


def _data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--response", required=True, help="name of the response column")
    p.add_argument("--penalty", required=True, choices=PENALTIES)
    p.add_argument("--groups", help="file of 'variable_index,group_index' lines (1-based)")
    p.add_argument("--weights", help="fixed | inv-power:A | exp:A | group-inv-norm")


def _grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-size", type=int, default=100)
    p.add_argument("--grid-decades", type=float, default=4.0)
    p.add_argument("--criterion", choices=("aic", "bic"), default="bic")
    p.add_argument("--cv", action="store_true", help="add leave-one-out CV selection")
    p.add_argument("--grouped", action="store_true",
                   help="discretize covariates into quantile bins and group their dummies")
    p.add_argument("--levels", type=int, default=4)


def _sim_args(p: argparse.ArgumentParser, B: int) -> None:
    p.add_argument("--B", type=int, default=B)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=30)
    p.add_argument("--snr", type=float, default=4.0)
    p.add_argument("--snr-definition", choices=SNR_DEFINITIONS, default="variance")
    p.add_argument("--group-size", type=int, default=3)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: LASSODF_JOBS or CPU count)")
    p.add_argument("--methods", nargs="+", choices=METHODS + ("lasso", "ols"),
                   default=list(METHODS))
    _grid_args_sim(p)


def _grid_args_sim(p):
    p.add_argument("--grid-size", type=int, default=100)
    p.add_argument("--grid-decades", type=float, default=4.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lassodf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one penalty at one gamma")
    _data_args(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--orthonormalize", action="store_true",
                   help="QR-orthonormalize the standardized design")
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("path", help="solution path, df curves and gamma selection")
    _data_args(p)
    _grid_args(p)
    _common(p)
    p.set_defaults(func=cmd_path)

    exp = sub.add_parser("experiment", help="simulation studies and data pipeline")
    esub = exp.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    p = esub.add_parser("unbiasedness", help="analytic df vs Monte Carlo covariance")
    _sim_args(p, 2000)
    _common(p)
    p.set_defaults(func=cmd_unbiasedness, n=50, p=12)
    p = esub.add_parser("table1", help="distribution of BIC-selected model sizes")
    _sim_args(p, 500)
    _common(p)
    p.set_defaults(func=cmd_table1)
    p = esub.add_parser("dataset", help="df curves and selections on a CSV file")
    _data_args(p)
    _grid_args(p)
    _common(p)
    p.set_defaults(func=cmd_path)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if hasattr(args, "jobs") and args.jobs is None:
            args.jobs = default_jobs()
        if hasattr(args, "methods") and args.func is cmd_table1:
            bad = set(args.methods) - set(METHODS)
            if bad:
                raise ConfigError(f"table1 supports {METHODS}, got {sorted(bad)}")
        start = time.perf_counter()
        code = args.func(args)
        log.info("finished in %.2f s", time.perf_counter() - start)
        return code
    except ConfigError as exc:
        print(f"lassodf: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"lassodf: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except LassoDfError as exc:
        print(f"lassodf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
