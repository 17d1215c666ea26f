"""Command-line interface.

Subcommands: score, surface, diagnose (signmap | vuong | sobol |
uncertainty), simulate, serve. Results go to --out (plus stdout summary);
structured diagnostics go to stderr. Report paths also render PNG figures
next to the delimited output unless --no-figures is given.

Exit codes: 0 success, 2 partial row failures, 1 fatal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import figures
from .altmodels import StructuralParams, ScoringModel, default_model
from .config import (
    AppConfig,
    default_t0,
    load_config,
    load_params,
    load_sector_table,
)
from .diagnostics import (
    cross_partial_sign_map,
    default_input_dists,
    monte_carlo_uncertainty,
    sobol_brute_force,
    sobol_total_effect,
    structural_score_function,
    vuong_experiment,
)
from .errors import HndlxError
from .model import OrganizationProfile
from .population import PopulationSpec, default_population_spec, generate_population
from .portfolio import ingest_portfolio, persist_portfolio, score_portfolio
from .surface import surface_points, write_surface_csv


def _err(message: str) -> None:
    print(f"hndlx: error: {message}", file=sys.stderr)


def _info(message: str) -> None:
    print(f"hndlx: {message}", file=sys.stderr)


def _load_app_config(args) -> AppConfig:
    """Flag > config file > defaults."""
    config = load_config(args.config) if getattr(args, "config", None) else AppConfig()
    params, sectors = config.params, config.sectors
    if getattr(args, "params", None):
        path = Path(args.params)
        if not path.exists():
            raise FileNotFoundError(f"--params: file not found: {path}")
        params = load_params(path)
    if getattr(args, "sectors", None):
        path = Path(args.sectors)
        if not path.exists():
            raise FileNotFoundError(f"--sectors: file not found: {path}")
        sectors = load_sector_table(path)
    return AppConfig(params=params, sectors=sectors,
                     m_max=config.m_max, z_crit=config.z_crit)


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _figures_enabled(args) -> bool:
    return bool(getattr(args, "out", None)) and not args.no_figures


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------


def cmd_score(args) -> int:
    config = _load_app_config(args)
    t0 = args.t0 if args.t0 is not None else default_t0()
    result = ingest_portfolio(args.portfolio, fmt=args.format, m_max=config.m_max)
    for row_error in result.row_errors:
        _err(f"ingest: {row_error.message}")

    scoring = score_portfolio(result.portfolio, config.params, config.sectors,
                              t0, workers=args.workers, m_max=config.m_max)
    for row_error in scoring.errors:
        _err(f"score: {row_error.message}")

    if args.out:
        persist_portfolio(result.portfolio, scoring.reports, args.out,
                          params=config.params, t0=t0)
        _info(f"wrote {len(scoring.reports)} reports to {args.out}")
        if _figures_enabled(args) and scoring.reports:
            base = Path(args.out)
            figures.render_score_histogram([r.ieq for r in scoring.reports],
                                           base.with_suffix(".scores.png"))
            figures.render_population(result.portfolio.column("V"),
                                      result.portfolio.column("E"),
                                      scoring.summary.get("spearman_v_e"),
                                      base.with_suffix(".population.png"))

    summary = dict(scoring.summary)
    summary["t0"] = t0
    summary["ingest_row_errors"] = len(result.row_errors)
    print(json.dumps(summary, indent=2))
    return 2 if (result.row_errors or scoring.errors) else 0


# ---------------------------------------------------------------------------
# surface
# ---------------------------------------------------------------------------


def cmd_surface(args) -> int:
    config = _load_app_config(args)
    points = surface_points(config.params, args.H, args.M, args.grid)
    write_surface_csv(points, args.out)
    _info(f"wrote {len(points)} surface nodes to {args.out}")
    if _figures_enabled(args):
        base = Path(args.out)
        figures.render_surface(points, args.grid, base.with_suffix(".png"))
        figures.render_elasticity_curves(
            config.params, base.with_suffix(".elasticities.png"))
    return 0


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------


def _diagnostic_model(family: str, config: AppConfig) -> ScoringModel:
    if family == "structural":
        p = config.params
        return ScoringModel("structural",
                            StructuralParams(a=p.a, b=p.b, theta=p.theta))
    return default_model(family)


def cmd_signmap(args) -> int:
    config = _load_app_config(args)
    model = _diagnostic_model(args.model, config)
    signmap = cross_partial_sign_map(model, grid_size=args.grid, tol=args.tol,
                                     h=args.h, epsilon=config.params.epsilon)
    payload = {"kind": "signmap", "model": model.to_dict(),
               "result": signmap.to_json_dict()}
    _write_json(payload, args.out)
    if args.out:
        csv_path = args.csv or Path(args.out).with_suffix(".csv")
        signmap.to_csv(csv_path)
        _info(f"wrote sign map CSV to {csv_path}")
        if not args.no_figures:
            figures.render_sign_map(signmap, Path(args.out).with_suffix(".png"))
    return 0


def cmd_vuong(args) -> int:
    config = _load_app_config(args)
    experiment = vuong_experiment(n=args.n, noise_sd=args.noise, seed=args.seed,
                                  params=config.params, n_restarts=args.restarts)
    payload = {"kind": "vuong", **experiment.to_json_dict()}
    _write_json(payload, args.out)
    if _figures_enabled(args):
        figures.render_llr_histogram(experiment.llr, experiment.vuong.z,
                                     Path(args.out).with_suffix(".png"))
    return 0


def cmd_sobol(args) -> int:
    config = _load_app_config(args)
    prior = config.sectors.get(args.sector)
    if prior is None:
        _err(f"--sector: unknown sector {args.sector!r}")
        return 1
    t0 = args.t0 if args.t0 is not None else default_t0()
    f = structural_score_function(config.params, prior, t0, m_max=config.m_max)
    dists = default_input_dists()
    if args.estimator == "pick_freeze":
        result = sobol_total_effect(f, dists, n_base=args.n, seed=args.seed)
    else:
        result = sobol_brute_force(f, dists, n_outer=args.n_outer,
                                   n_inner=args.n_inner, seed=args.seed)
    payload = {"kind": "sobol", "sector": args.sector, "t0": t0,
               "result": result.to_json_dict()}
    _write_json(payload, args.out)
    if _figures_enabled(args):
        figures.render_sobol(result, Path(args.out).with_suffix(".png"))
    return 0


def cmd_uncertainty(args) -> int:
    config = _load_app_config(args)
    prior = config.sectors.get(args.sector)
    if prior is None:
        _err(f"--sector: unknown sector {args.sector!r}")
        return 1
    t0 = args.t0 if args.t0 is not None else default_t0()
    profile = OrganizationProfile(org_id="whatif", V=args.v, E=args.e,
                                  T_D=args.td, sector_id=args.sector, M=args.m)
    noise = {"V": args.noise_v, "E": args.noise_e,
             "T_D": args.noise_td, "M": args.noise_m}
    result = monte_carlo_uncertainty(profile, config.params, prior, t0,
                                     noise=noise, n=args.n, seed=args.seed,
                                     m_max=config.m_max)
    payload = {"kind": "uncertainty", "profile": profile.to_dict(),
               "noise": noise, "t0": t0, "result": result.to_json_dict()}
    _write_json(payload, args.out)
    if _figures_enabled(args):
        figures.render_uncertainty(result, Path(args.out).with_suffix(".png"))
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.spec:
        path = Path(args.spec)
        if not path.exists():
            raise FileNotFoundError(f"--spec: file not found: {path}")
        spec_dict = json.loads(path.read_text(encoding="utf-8"))
        if args.n is not None:
            spec_dict["n"] = args.n
        if args.seed is not None:
            spec_dict["seed"] = args.seed
        spec = PopulationSpec.from_dict(spec_dict)
    else:
        spec = default_population_spec(n=args.n if args.n is not None else 1000,
                                       seed=args.seed if args.seed is not None else 0)
    portfolio = generate_population(spec)
    persist_portfolio(portfolio, None, args.out)
    _info(f"wrote {len(portfolio)} organizations to {args.out}")
    if _figures_enabled(args):
        from .population import spearman
        rho = spearman(portfolio.column("V"), portfolio.column("E")) \
            if len(portfolio) >= 2 else None
        figures.render_population(portfolio.column("V"), portfolio.column("E"),
                                  rho, Path(args.out).with_suffix(".population.png"))
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_app_config(args)
    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, out_required: bool = False) -> None:
    p.add_argument("--config", help="JSON config file (params, sector_table, epsilon, m_max, z_crit)")
    p.add_argument("--out", required=out_required, help="output path")
    p.add_argument("--no-figures", action="store_true",
                   help="skip PNG rendering next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hndlx",
        description="HNDL exposure scoring and structural diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score a portfolio file")
    p.add_argument("--portfolio", required=True, help="input portfolio file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--params", help="JSON model parameters file")
    p.add_argument("--sectors", help="JSON sector table file")
    p.add_argument("--t0", type=float, default=None,
                   help="assessment epoch year (default: current year)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0,
                   help="accepted for interface stability; scoring is deterministic")
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("surface", help="score surface over the (V, E) unit square")
    p.add_argument("--grid", type=int, default=25)
    p.add_argument("--params", help="JSON model parameters file")
    p.add_argument("--H", type=float, default=0.6, help="temporal hazard value")
    p.add_argument("--M", type=float, default=1.15, help="governance multiplier")
    _add_common(p, out_required=True)
    p.set_defaults(func=cmd_surface)

    diag = sub.add_parser("diagnose", help="specification diagnostics")
    dsub = diag.add_subparsers(dest="diagnostic", required=True)

    p = dsub.add_parser("signmap", help="log cross-partial sign map")
    p.add_argument("--model", choices=("structural", "ces", "log_additive", "threshold"),
                   default="structural")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--h", type=float, default=1e-3, help="relative stencil step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params", help="JSON model parameters file")
    p.add_argument("--csv", help="sign map CSV path (default: out with .csv)")
    _add_common(p)
    p.set_defaults(func=cmd_signmap)

    p = dsub.add_parser("vuong", help="structural vs CES synthetic power check")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--noise", type=float, default=0.05, help="log-score noise sd")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--params", help="JSON model parameters file")
    _add_common(p)
    p.set_defaults(func=cmd_vuong)

    p = dsub.add_parser("sobol", help="total-effect sensitivity of the score")
    p.add_argument("--estimator", choices=("pick_freeze", "brute_force"),
                   default="pick_freeze")
    p.add_argument("--n", type=int, default=1024, help="pick-freeze base sample count")
    p.add_argument("--n-outer", type=int, default=200)
    p.add_argument("--n-inner", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sector", default="generic")
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--params", help="JSON model parameters file")
    p.add_argument("--sectors", help="JSON sector table file")
    _add_common(p)
    p.set_defaults(func=cmd_sobol)

    p = dsub.add_parser("uncertainty", help="Monte Carlo input-noise propagation")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--e", type=float, required=True)
    p.add_argument("--td", type=float, required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--sector", default="generic")
    p.add_argument("--noise-v", type=float, default=0.10)
    p.add_argument("--noise-e", type=float, default=0.10)
    p.add_argument("--noise-td", type=float, default=0.20)
    p.add_argument("--noise-m", type=float, default=0.05)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--params", help="JSON model parameters file")
    p.add_argument("--sectors", help="JSON sector table file")
    _add_common(p)
    p.set_defaults(func=cmd_uncertainty)

    p = sub.add_parser("simulate", help="generate a synthetic portfolio")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--spec", help="PopulationSpec JSON file")
    p.add_argument("--seed", type=int, default=None)
    _add_common(p, out_required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8099)
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _err(str(exc))
        return 1
    except HndlxError as exc:
        _err(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
