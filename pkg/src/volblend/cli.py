"""Command line interface: volblend run / validate / simulate.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .arch import ModelParams, ModelSpec, simulate
from .exceptions import ConfigError, DataError, NumericalError, PipelineStageError
from .pipeline import STAGES, run_pipeline, validate_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

_FAMILY_ALIASES = {"arch": "ARCH", "garch": "GARCH", "egarch": "EGARCH", "gjr": "GJR"}
_INNOVATION_ALIASES = {
    "normal": "normal", "n": "normal",
    "student_t": "student_t", "t": "student_t",
    "skew_t": "skew_t", "st": "skew_t",
    "ged": "ged", "g": "ged",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volblend",
        description="Blended ARCH-family volatility forecasting pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline from a config file")
    run.add_argument("config", help="path to the YAML config")
    run.add_argument(
        "--stage",
        choices=STAGES,
        default="all",
        help="'bank' fits and caches the feature bank only; 'blend' reuses the cache",
    )

    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config", help="path to the YAML config")

    sim = sub.add_parser("simulate", help="write a synthetic close-price CSV fixture")
    sim.add_argument("family", choices=sorted(_FAMILY_ALIASES), help="model family")
    sim.add_argument(
        "params",
        help="comma-separated: alpha0,alphas...,[gammas...],betas...,[shape[,skew]]",
    )
    sim.add_argument("--out", required=True, help="output CSV path")
    sim.add_argument("--p", type=int, default=1, help="variance lags (shock lags for arch)")
    sim.add_argument("--q", type=int, default=1, help="shock lags (ignored for arch)")
    sim.add_argument("--innovation", default="normal", choices=sorted(_INNOVATION_ALIASES))
    sim.add_argument("--n", type=int, default=600, help="number of returns to simulate")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--start-price", type=float, default=100.0)
    return parser


def _parse_sim_params(family: str, spec: ModelSpec, raw: str) -> ModelParams:
    values = [float(v) for v in raw.split(",") if v.strip() != ""]
    q = spec.n_shock_lags
    p = spec.n_variance_lags
    n_gammas = q if family in ("EGARCH", "GJR") else 0
    need = 1 + q + n_gammas + p
    shape = skew = None
    extra = len(values) - need
    if spec.innovation in ("student_t", "ged"):
        if extra != 1:
            raise ConfigError(f"{spec.name}: expected {need + 1} parameters, got {len(values)}")
        shape = values[-1]
    elif spec.innovation == "skew_t":
        if extra != 2:
            raise ConfigError(f"{spec.name}: expected {need + 2} parameters, got {len(values)}")
        shape, skew = values[-2], values[-1]
    elif extra != 0:
        raise ConfigError(f"{spec.name}: expected {need} parameters, got {len(values)}")
    alpha0 = values[0]
    alphas = tuple(values[1 : 1 + q])
    gammas = tuple(values[1 + q : 1 + q + n_gammas])
    betas = tuple(values[1 + q + n_gammas : 1 + q + n_gammas + p])
    return ModelParams(alpha0, alphas, betas, gammas, shape, skew)


def _cmd_run(args) -> int:
    report = run_pipeline(args.config, stage=args.stage)
    if report is None:
        print("feature bank fitted and cached")
        return EXIT_OK
    print(f"models evaluated: {len(report.rows)} (benchmark {report.benchmark})")
    for row in report.rows:
        print(f"  {row.name}: rmse={row.rmse:.6e} mae={row.mae:.6e}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    problems = validate_config(args.config)
    if not problems:
        print("config OK")
        return EXIT_OK
    for problem in problems:
        print(problem)
    return EXIT_CONFIG


def _cmd_simulate(args) -> int:
    family = _FAMILY_ALIASES[args.family]
    innovation = _INNOVATION_ALIASES[args.innovation]
    q = None if family == "ARCH" else args.q
    spec = ModelSpec(family, args.p, q, innovation)
    params = _parse_sim_params(family, spec, args.params)
    series = simulate(spec, params, args.n, args.seed)
    prices = args.start_price * np.exp(np.concatenate([[0.0], np.cumsum(series.returns)]))
    from .market_data import synthetic_dates

    dates = synthetic_dates(args.n + 1)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w") as handle:
        handle.write("date,close\n")
        for date, close in zip(dates, prices):
            handle.write(f"{date.isoformat()},{float(close)!r}\n")
    print(f"wrote {args.n + 1} prices to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate, "simulate": _cmd_simulate}
    try:
        return handlers[args.command](args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        original = exc.original
        if isinstance(original, ConfigError):
            return EXIT_CONFIG
        if isinstance(original, DataError):
            return EXIT_DATA
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
