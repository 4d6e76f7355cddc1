"""Command-line front end (``lfe-lab``).

Exit codes: 0 success, 2 precondition violation, 3 numerical failure,
4 acceptance failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .analysis import COMPARE_COLUMNS, compare_summary, compare_table, fit_rate
from .errors import DomainError, IntegrationError, LfeLabError, SingularCovarianceError, StabilityError
from .gaussfun import (
    GaussOnStar,
    edge_marginal_kl,
    gauss_kl,
    modified_fisher,
    pinsker_tv_bound,
    sparse_free_energy_abs,
    sparse_free_energy_gap,
    tv_upper_bound,
)
from .glfe import T_INF, CycleCov, GlfeParams, cycle_cov_entry, glfe_cov, glfe_cov_grid, stationary_pi
from .io import read_csv, write_csv, write_json
from .mcsim import SimConfig, comparison_rows, empirical_neighborhood_cov, empirical_star_cov, simulate_cycle, simulate_gmlfe
from .riccati import IntegratorConfig, integrate, trajectory_rows
from .symcov import conditional_gaussian, lambda_eps, make_symcov, precision_and_det
from .verify import run_suite

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4
DEFAULT_SEED = 12345
SIM_COLUMNS = ("distance", "estimate", "std_error", "exact", "z_score")


def _default_seed() -> int:
    env = os.environ.get("LFE_LAB_SEED")
    return int(env, 0) if env else DEFAULT_SEED


def _triple(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers a,b,c")
    return parts[0], parts[1], parts[2]


def _window(text: str) -> tuple[float, float | None]:
    parts = text.split(",")
    lo = float(parts[0])
    hi = float(parts[1]) if len(parts) > 1 and parts[1] else None
    return lo, hi


def _config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    if cfg.get("init") is not None:
        cfg["init"] = list(cfg["init"])
    if cfg.get("window") is not None:
        cfg["window"] = list(cfg["window"])
    return cfg


def _init(args) -> tuple[float, float, float]:
    return args.init if args.init is not None else (args.var0, 0.0, 0.0)


def _grid(t_max: float, step: float) -> np.ndarray:
    n = math.ceil(t_max / step - 1e-9)
    return np.array([min(i * step, t_max) for i in range(n)] + [t_max])


# -- subcommands ------------------------------------------------------------

def cmd_stationary(args) -> int:
    S = stationary_pi(args.alpha, args.beta)
    P, det = precision_and_det(S)
    write_json(args.out, _config(args), {
        "sigma": list(S.triple()),
        "det": det,
        "precision_row0": P[0].tolist(),
        "markov_zero": float(P[1, 2]),
        "precision": P.tolist(),
    })
    return EXIT_OK


def cmd_riccati(args) -> int:
    traj = integrate(args.kappa, args.alpha, args.beta, make_symcov(args.kappa, *_init(args)), args.t_max, IntegratorConfig(grid_spacing=args.grid))
    write_csv(args.out, _config(args), ("t", "a", "b", "c"), trajectory_rows(traj))
    return EXIT_OK


def cmd_glfe(args) -> int:
    ts = _grid(args.t_max, args.grid)
    vals = glfe_cov_grid(GlfeParams(args.alpha, args.beta, args.var0), ts)
    write_csv(args.out, _config(args), ("t", "sigma0", "sigma1", "sigma2"), ([float(t), *map(float, v)] for t, v in zip(ts, vals)))
    return EXIT_OK


def cmd_cycle(args) -> int:
    p = GlfeParams(args.alpha, args.beta, args.var0)
    if args.mode == "stationary":
        c = CycleCov(args.n, T_INF, p)
        limit = stationary_pi(p.alpha, p.beta).triple()
    else:
        c = CycleCov(args.n, args.t_max, p)
        limit = glfe_cov(p, args.t_max).triple()
    rows = []
    for d in range(args.n // 2 + 1):
        lim = limit[d] if d < 3 else float("nan")
        rows.append((d, cycle_cov_entry(c, d, 0), lim))
    write_csv(args.out, _config(args), ("distance", "cycle_cov", "limit"), rows)
    return EXIT_OK


def cmd_compare(args) -> int:
    p = GlfeParams(args.alpha, args.beta, args.var0)
    mode = args.mode or "three-halves"
    tab = compare_table(p.alpha, p.beta, p.var0, args.t_max, args.grid, mode)
    cfg = _config(args)
    write_csv(args.out, cfg, COMPARE_COLUMNS, zip(*(tab[c] for c in COMPARE_COLUMNS)))
    summary = compare_summary(tab, p, args.window or (2.0, 8.0))
    target = args.summary or (args.out + ".summary.json" if args.out and args.out != "-" else None)
    if target is None:
        import json

        sys.stderr.write(json.dumps(summary, indent=2) + "\n")
    else:
        write_json(target, cfg, summary)
    return EXIT_OK


def _scheme(args) -> str:
    return args.mode or "euler"


def cmd_simulate_cycle(args) -> int:
    p = GlfeParams(args.alpha, args.beta, args.var0)
    ens = simulate_cycle(p, SimConfig(args.paths, args.dt, args.t_max, args.seed, _scheme(args), n=args.n))
    c = CycleCov(args.n, args.t_max, p)
    ds = list(range(min(3, args.n // 2 + 1)))
    rows = comparison_rows([empirical_neighborhood_cov(ens, d) for d in ds], [cycle_cov_entry(c, d, 0) for d in ds], ds)
    write_csv(args.out, _config(args), SIM_COLUMNS, rows)
    return EXIT_OK


def cmd_simulate_mlfe(args) -> int:
    sigma0 = make_symcov(args.kappa, *_init(args))
    traj = integrate(args.kappa, args.alpha, args.beta, sigma0, args.t_max)
    ens = simulate_gmlfe(traj, SimConfig(args.paths, args.dt, args.t_max, args.seed, _scheme(args)))
    est, se = empirical_star_cov(ens)
    # graph distance on the star: 0 -> a, 1 -> b (center-leaf), 2 -> c (leaf-leaf)
    rows = comparison_rows(list(zip(est, se)), traj.values[-1], [0, 1, 2])
    write_csv(args.out, _config(args), SIM_COLUMNS, rows)
    return EXIT_OK


def cmd_functionals(args) -> int:
    nu = GaussOnStar.of(*_init(args))
    pi = GaussOnStar(stationary_pi(args.alpha, args.beta))
    prefactor = args.mode or "three-halves"
    kl = gauss_kl(nu, pi)
    cg = conditional_gaussian(nu.cov)
    payload = {
        "kl": kl,
        "edge_kl": edge_marginal_kl(nu, pi),
        "tv_bound": tv_upper_bound(pi, nu, prefactor),
        "pinsker_tv_bound": pinsker_tv_bound(max(kl, 0.0)),
        "sfe_gap": sparse_free_energy_gap(nu, args.alpha, args.beta),
        "sfe_abs": sparse_free_energy_abs(nu, args.alpha, args.beta),
        "fisher": modified_fisher(nu, args.alpha, args.beta),
        "conditional": {"coeff_center": cg.coeff_center, "coeff_leaf": cg.coeff_leaf, "variance": cg.variance},
    }
    if args.eps is not None:
        payload["lambda_eps"] = {
            "eps": args.eps,
            "rederived": lambda_eps(cg.variance, args.eps),
            "paper_printed": lambda_eps(cg.variance, args.eps, "paper-printed"),
        }
    write_json(args.out, _config(args), payload)
    return EXIT_OK


def cmd_fit_rate(args) -> int:
    if not args.input:
        raise DomainError("fit-rate needs --input CSV")
    _, cols, rows = read_csv(args.input)
    if args.column not in cols:
        raise DomainError(f"column {args.column!r} not in {cols}")
    data = np.array(rows)
    t = data[:, cols.index(args.time_column)]
    v = data[:, cols.index(args.column)]
    fit = fit_rate(t, v, args.window or (2.0, None))
    write_json(args.out, _config(args), {"column": args.column, **fit.to_dict()})
    return EXIT_OK


def cmd_verify(args) -> int:
    checks, timing = run_suite(args.suite)
    for ch in checks:
        sys.stderr.write(ch.line() + "\n")
    ok = all(ch.passed for ch in checks)
    write_json(args.out, _config(args), {
        "suite": args.suite,
        "passed": ok,
        "n_checks": len(checks),
        "n_failed": sum(not ch.passed for ch in checks),
        "seconds": {str(k): round(v, 3) for k, v in timing.items()},
        "checks": [ch.to_dict() for ch in checks],
    })
    return EXIT_OK if ok else EXIT_ACCEPTANCE


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=2.0, help="self-interaction coefficient")
    common.add_argument("--beta", type=float, default=1.0, help="neighbour interaction coefficient")
    common.add_argument("--kappa", type=int, default=2, help="star degree")
    common.add_argument("--var0", type=float, default=1.0, help="initial variance per coordinate")
    common.add_argument("--init", type=_triple, default=None, metavar="A,B,C", help="initial star covariance (default var0,0,0)")
    common.add_argument("--t-max", dest="t_max", type=float, default=10.0, help="final time")
    common.add_argument("--grid", type=float, default=0.01, help="output grid spacing")
    common.add_argument("--n", type=int, default=8, help="cycle length")
    common.add_argument("--paths", type=int, default=20_000, help="Monte Carlo paths")
    common.add_argument("--dt", type=float, default=1e-3, help="SDE time step")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=_default_seed(), help="64-bit seed (env LFE_LAB_SEED overrides the default)")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--mode", default=None, help="scheme (euler|exact-gaussian), TV prefactor (three-halves|unit) or cycle time (transient|stationary)")

    parser = argparse.ArgumentParser(prog="lfe-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lfe-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    add("stationary", cmd_stationary, "stationary covariance, determinant and precision (JSON)")
    add("riccati", cmd_riccati, "Riccati covariance trajectory (CSV t,a,b,c)")
    add("glfe", cmd_glfe, "exact GLFE covariances (CSV t,sigma0,sigma1,sigma2)")
    add("cycle", cmd_cycle, "n-cycle covariance by distance (CSV)")
    sp = add("compare", cmd_compare, "GLFE vs GMLFE vs stationary law (CSV + JSON summary)")
    sp.add_argument("--window", type=_window, default=None, metavar="LO,HI", help="rate-fit window (default 2,8)")
    sp.add_argument("--summary", default=None, help="summary JSON path (default <out>.summary.json)")
    add("simulate-cycle", cmd_simulate_cycle, "Monte Carlo on the n-cycle vs spectral covariance (CSV)")
    add("simulate-mlfe", cmd_simulate_mlfe, "Monte Carlo of the star SDE vs Riccati (CSV)")
    sp = add("functionals", cmd_functionals, "information functionals of N(0, M_2(init)) (JSON)")
    sp.add_argument("--eps", type=float, default=None, help="also report Lambda_eps at this eps")
    sp = add("fit-rate", cmd_fit_rate, "exponential rate fit of a CSV column (JSON)")
    sp.add_argument("--input", default=None, help="CSV file to read")
    sp.add_argument("--column", default="a", help="value column")
    sp.add_argument("--time-column", dest="time_column", default="t", help="time column")
    sp.add_argument("--window", type=_window, default=None, metavar="LO[,HI]", help="fit window (default 2,end)")
    sp = add("verify", cmd_verify, "run acceptance checks (JSON report)")
    sp.add_argument("suite", nargs="?", default="all", choices=["algebra", "convergence", "montecarlo", "all"])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, SingularCovarianceError) as exc:
        sys.stderr.write(f"lfe-lab: precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except (IntegrationError, StabilityError, LfeLabError, ArithmeticError) as exc:
        sys.stderr.write(f"lfe-lab: numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
