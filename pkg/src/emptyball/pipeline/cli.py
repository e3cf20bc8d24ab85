"""Command line front end.

    emptyball simulate  --config configs/thm1.toml [--seed S] [--workers W] [--out F] [--format csv|json]
    emptyball factorize --config ...
    emptyball oracle    --config ...   exact lattice / continuum values for the (n, r) grid
    emptyball survival  --config ...   q_n and its scaled limit for each n
    emptyball theory    --config ...   theory bands for each r
    emptyball report    FILE [FILE ...] summary of previous runs, plus .dat plot tables
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError, RegimeError, TooLarge, UnsupportedLaw
from ..gw import survival_at, survival_constant
from ..limits import theory_band
from ..offspring import Regime
from ..oracle import exact_tail_continuum, exact_tail_lattice
from .config import load_config
from .experiment import dat_files, read_rows, run_experiment, to_csv, write_report


def _load(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(master_seed=args.seed, workers=args.workers,
                              output=args.out, format=args.format)


def _emit(text: str, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table(header, rows) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_estimate(args, method):
    cfg = _load(args)
    report = run_experiment(cfg, method)
    text = write_report(report, cfg.output, cfg.format)
    if not cfg.output:
        sys.stdout.write(text)
    for name, verdict in report.checks.items():
        print(f"{verdict:8s} {name}", file=sys.stderr)
    return report.exit_status


def cmd_oracle(args):
    cfg = _load(args)
    rows = []
    for n in cfg.n_list:
        rho_scale = cfg.a_n(n)
        for r in cfg.r_list:
            lat = exact_tail_lattice(cfg.law, n, rho_scale * r, cfg.step_law)
            cont = exact_tail_continuum(cfg.law, n, rho_scale * r, cfg.step_law)
            rows.append((n, r, rho_scale * r, lat, cont))
    _emit(_table(("n", "r", "radius", "p_lattice", "p_continuum"), rows), cfg.output)
    return 0


def cmd_survival(args):
    cfg = _load(args)
    law = cfg.law
    const = survival_constant(law)
    rows = []
    for n in cfg.n_list:
        q = survival_at(law, n)
        if law.regime is Regime.CRITICAL_FINITE_VAR:
            scaled = n * q
        elif law.regime is Regime.CRITICAL_STABLE:
            scaled = n * q**law.beta * law.c_coef
        else:
            scaled = q / law.mean_m**n
        rows.append((n, q, scaled, const))
    _emit(_table(("n", "q_n", "scaled", "limit"), rows), cfg.output)
    return 0


def cmd_theory(args):
    cfg = _load(args)
    rows = []
    for r in cfg.r_list:
        b = theory_band(cfg.law, cfg.step_law, cfg.d, r)
        ex = "" if b.exact is None else b.exact
        tag = "rigorous" if b.rigorous else "advisory"
        lo, hi = (b.lo, b.hi) if b.rigorous else (b.advisory_lo, b.advisory_hi)
        rows.append((r, lo, hi, ex, tag, b.description))
    _emit(_table(("r", "band_lo", "band_hi", "band_exact", "kind", "description"), rows), cfg.output)
    return 0


def cmd_report(args):
    rows = []
    for path in args.files:
        rows.extend(read_rows(path))
    text = to_csv(rows)
    _emit(text, args.out)
    if args.out:
        base = Path(args.out)
        for name, body in dat_files(rows).items():
            (base.parent / f"{base.stem}_{name}").write_text(body)
    counts = {}
    for row in rows:
        counts[row["verdict"]] = counts.get(row["verdict"], 0) + 1
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())), file=sys.stderr)
    return 1 if counts.get("FAIL") else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emptyball", description="Empty-ball probabilities for branching random walks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "direct field simulation"), ("factorize", "stratified hit-integral estimator"),
                        ("oracle", "exact lattice values"), ("survival", "survival probabilities q_n"),
                        ("theory", "limit values and bands")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"))
    rp = sub.add_parser("report", help="merge and summarise report files")
    rp.add_argument("files", nargs="+")
    rp.add_argument("--out")
    rp.add_argument("--format", choices=("csv",), default="csv")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_estimate(args, "direct")
        if args.command == "factorize":
            return cmd_estimate(args, "factorized")
        if args.command == "oracle":
            return cmd_oracle(args)
        if args.command == "survival":
            return cmd_survival(args)
        if args.command == "theory":
            return cmd_theory(args)
        return cmd_report(args)
    except (ConfigError, RegimeError, UnsupportedLaw, TooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
