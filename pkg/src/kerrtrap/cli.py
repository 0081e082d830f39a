"""Command-line front end.

Exit codes: 0 success, 1 usage or runtime error, 2 the computation ran but
the property it checks does not hold (not subextremal, bound violated).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import flow, normal_form, schemas, symbol_scaling, trapping
from .config import TOLERANCES, ConfigError, RunConfig, check_tolerances, parse_grid, read_config_file
from .errors import KerrTrapError
from .integrators import IntegratorSpec
from .parallel import pmap
from .phase_space import PhasePoint, project_to_characteristic
from .spacetime import BlackHoleParams, classify_subextremal

EXIT_OK, EXIT_ERROR, EXIT_PROPERTY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with "property fails"
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--mass", type=float)
    p.add_argument("--spin", type=float)
    p.add_argument("--lambda", dest="cosmo", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid")
    p.add_argument("--output")
    p.add_argument("--format", choices=["csv", "json"])
    for name in TOLERANCES:
        p.add_argument(f"--tol-{name.replace('_', '-')}", dest=f"tol_{name}", type=float, metavar="X")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kerrtrap", description="Trapping, normal forms and symbol orders near Kerr(-de Sitter) photon regions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("subextremal", help="classify the horizon structure")
    _common(p)

    p = sub.add_parser("trapped-set", help="sample the trapped set with expansion rates")
    _common(p)
    p.add_argument("--n", type=int, default=20)

    p = sub.add_parser("rates", help="global bounds of the expansion rates")
    _common(p)

    p = sub.add_parser("flow", help="integrate the H_p flow")
    _common(p)
    p.add_argument("--init", help="t,r,theta,phi,xi_t,xi_r,xi_theta,xi_phi")
    p.add_argument("--psi", type=float, help="start on Gamma with momentum direction angle psi")
    p.add_argument("--theta", type=float, default=math.pi / 2, help="polar angle for --psi starts")
    p.add_argument("--project", action="store_true", help="solve p = 0 for xi_theta before integrating")
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--method", choices=["dp45", "rk4"], default="dp45")
    p.add_argument("--step", type=float)
    p.add_argument("--rescale", action="store_true")

    p = sub.add_parser("normal-form", help="verify the canonical relations of the normal form")
    _common(p)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--mode", choices=["dual", "fd"], default="dual")

    p = sub.add_parser("symbol-order", help="estimate symbol orders of a built-in test symbol")
    _common(p)
    p.add_argument("--symbol", default="x1", help=f"one of {', '.join(symbol_scaling.BUILTINS)}")
    return parser


def make_config(args: argparse.Namespace, default_fmt: str) -> RunConfig:
    base = read_config_file(args.config) if args.config else {}
    tols = dict(base.get("tolerances", {}))
    for name in TOLERANCES:
        v = getattr(args, f"tol_{name}", None)
        if v is not None:
            tols[name] = v

    def pick(flag, key, conv):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        if key in base:
            return conv(base[key])
        return None

    mass = pick("mass", "mass", float)
    spin = pick("spin", "spin", float)
    cosmo = pick("cosmo", "lambda", float)
    if mass is None or spin is None:
        raise ConfigError("--mass and --spin are required (flag or config file)")
    grid = pick("grid", "grid", str)
    output = pick("output", "output", str)
    return RunConfig(
        params=BlackHoleParams(mass, spin, cosmo or 0.0),
        tolerances=check_tolerances(tols),
        seed=pick("seed", "seed", int) or 0,
        output=Path(output) if output else None,
        fmt=pick("format", "format", str) or default_fmt,
        alpha=pick("alpha", "alpha", float) or 0.5,
        grid=parse_grid(grid) if grid else (64, 32, 2),
    )


def _emit(cfg: RunConfig, text: str, out) -> None:
    if cfg.output is not None:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands

def cmd_subextremal(cfg: RunConfig, out) -> int:
    rep = classify_subextremal(cfg.params, cfg.tol("root_separation"))
    doc = rep.to_dict()
    schemas.validate(doc, schemas.SUBEXTREMAL)
    if cfg.fmt == "csv":
        text = _csv(["is_subextremal", "r_e", "r_c_horizon", "roots"],
                    [[rep.is_subextremal, rep.r_e, rep.r_c_horizon, " ".join(f"{x:.17g}" for x in rep.roots)]])
    else:
        text = _json(doc)
    _emit(cfg, text, out)
    return EXIT_OK if rep.is_subextremal else EXIT_PROPERTY


TRAPPED_COLUMNS = ("xi_t", "xi_phi", "r_crit", "theta", "xi_theta", "w_u", "w_s")


def cmd_trapped_set(cfg: RunConfig, n: int, out) -> int:
    sample = trapping.sample_trapped_set(cfg.params, n, cfg.seed, cfg.tol("xi_floor"), cfg.tol("theta_min"))

    def row(d):
        wu, ws = trapping.expansion_rate(cfg.params, d.point, cfg.tol("neighborhood_phi"), cfg.tol("neighborhood_r"))
        return [d.xi_t, d.xi_phi, d.r_crit, d.point.theta, d.point.xi_theta, float(wu), float(ws)]

    rows = pmap(row, sample.data)
    doc = {"rows": [dict(zip(TRAPPED_COLUMNS, r)) for r in rows], "skipped": sample.skipped}
    schemas.validate(doc, schemas.TRAPPED_SET)
    text = _json(doc) if cfg.fmt == "json" else _csv(TRAPPED_COLUMNS, rows)
    _emit(cfg, text, out)
    bad = any(r[5] <= 0 or r[6] <= 0 for r in rows)
    return EXIT_PROPERTY if bad else EXIT_OK


def cmd_rates(cfg: RunConfig, out) -> int:
    if len(cfg.grid) != 3:
        raise ConfigError("rates needs a grid of the form PSIxTHETAxSIGN")
    rb = trapping.nu_bounds(cfg.params, cfg.grid, cfg.tol("xi_floor"), cfg.tol("theta_min"))
    doc = rb.to_dict()
    schemas.validate(doc, schemas.RATE_BOUNDS)
    if cfg.fmt == "csv":
        text = _csv(["nu_min", "nu_max"], [[rb.nu_min, rb.nu_max]])
    else:
        text = _json(doc)
    _emit(cfg, text, out)
    return EXIT_OK


def cmd_flow(cfg: RunConfig, args, out) -> int:
    if args.init:
        vals = [float(v) for v in args.init.split(",")]
        if len(vals) != 8:
            raise ConfigError("--init needs eight comma-separated numbers")
        init = PhasePoint(*vals)
        if args.project:
            init = project_to_characteristic(cfg.params, init, cfg.tol("theta_min"))
    elif args.psi is not None:
        init = trapping.trapped_point(cfg.params, args.psi, args.theta, theta_min=cfg.tol("theta_min")).point
    else:
        raise ConfigError("flow needs --init or --psi")
    if args.method == "rk4":
        spec = IntegratorSpec("rk4", step=args.step or 1e-3)
    else:
        spec = IntegratorSpec("dp45", rtol=cfg.tol("rtol"), atol=cfg.tol("atol"))
    traj = flow.integrate_hp(cfg.params, init, args.duration, spec, rescale=args.rescale, theta_min=cfg.tol("theta_min"))
    if cfg.fmt == "json":
        rows = list(csv.DictReader(io.StringIO(traj.to_csv())))
        doc = {
            "samples": [{k: float(v) for k, v in r.items()} for r in rows],
            "integrator": traj.integrator,
            "diagnostics": traj.diagnostics,
            "exit_reason": traj.exit_reason,
        }
        schemas.validate(doc, schemas.FLOW)
        text = _json(doc)
    else:
        text = traj.to_csv()
    _emit(cfg, text, out)
    return EXIT_OK


def cmd_normal_form(cfg: RunConfig, n: int, mode: str, out) -> int:
    pts = trapping.sample_neighborhood(cfg.params, n, cfg.seed, xi_floor=cfg.tol("xi_floor"), theta_min=cfg.tol("theta_min"))
    reports = pmap(lambda p: normal_form.verify_canonical(cfg.params, p, mode, cfg.tol("fd_step")), pts)
    worst = max((r.max_residual for r in reports), default=0.0)
    tol = cfg.tol("canonical_dual" if mode == "dual" else "canonical_fd")
    doc = {
        "reports": [r.to_dict() for r in reports],
        "max_residual": worst,
        "mode": "dual-number" if mode == "dual" else "finite-difference",
        "passed": worst < tol,
    }
    schemas.validate(doc, schemas.NORMAL_FORM)
    if cfg.fmt == "csv":
        text = _csv(["index", "max_residual"], [[i, r.max_residual] for i, r in enumerate(reports)])
    else:
        text = _json(doc)
    _emit(cfg, text, out)
    return EXIT_OK if doc["passed"] else EXIT_PROPERTY


def cmd_symbol_order(cfg: RunConfig, name: str, out) -> int:
    sym = symbol_scaling.builtin_symbol(name, cfg.alpha)
    est = symbol_scaling.estimate_orders(sym, cfg.alpha)
    doc = est.to_dict() | {"symbol": name}
    schemas.validate(doc, schemas.ORDER_ESTIMATE)
    if cfg.fmt == "csv":
        text = _csv(["symbol", "alpha", "m_est", "m_tilde_est", "fit_residual"],
                    [[name, cfg.alpha, est.m_est, est.m_tilde_est, est.fit_residual]])
    else:
        text = _json(doc)
    _emit(cfg, text, out)
    return EXIT_OK


DEFAULT_FORMAT = {"trapped-set": "csv", "flow": "csv"}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args, DEFAULT_FORMAT.get(args.command, "json"))
        if args.command == "subextremal":
            return cmd_subextremal(cfg, out)
        if args.command == "trapped-set":
            return cmd_trapped_set(cfg, args.n, out)
        if args.command == "rates":
            return cmd_rates(cfg, out)
        if args.command == "flow":
            return cmd_flow(cfg, args, out)
        if args.command == "normal-form":
            return cmd_normal_form(cfg, args.n, args.mode, out)
        if args.command == "symbol-order":
            return cmd_symbol_order(cfg, args.symbol, out)
        raise UsageError(f"unknown command {args.command}")
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ConfigError, KerrTrapError, ValueError, OSError) as exc:
        print(f"kerrtrap: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
