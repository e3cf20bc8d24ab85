"""Run an (n, r) grid, attach theory bands and verdicts, and write reports."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import CappedExcess
from .config import ExperimentConfig
from .estimators import CAPPED_LIMIT, TailEstimate, estimate_direct, estimate_factorized

CSV_COLUMNS = ("regime", "d", "n", "r", "a_n", "method", "M", "p_hat", "ci_lo", "ci_hi",
               "band_lo", "band_hi", "band_exact", "trunc_eps", "capped", "seed", "verdict")

PASS, FAIL, ADVISORY, NA = "PASS", "FAIL", "ADVISORY", "NA"


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    estimates: list[TailEstimate]
    checks: dict[str, str] = field(default_factory=dict)

    @property
    def exit_status(self) -> int:
        bad = any(e.verdict == FAIL for e in self.estimates) or FAIL in self.checks.values()
        return 1 if bad else 0

    def rows(self) -> list[dict]:
        return [estimate_row(e) for e in self.estimates]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def estimate_row(e: TailEstimate) -> dict:
    b = e.band
    lo = hi = ex = None
    if b is not None:
        lo, hi, ex = (b.advisory_lo, b.advisory_hi, None) if not b.rigorous else (b.lo, b.hi, b.exact)
    return dict(regime=e.regime, d=e.d, n=e.n, r=e.r, a_n=float(e.a_n), method=e.method, M=e.M_effective,
                p_hat=float(e.p_hat), ci_lo=float(e.ci_lo), ci_hi=float(e.ci_hi), band_lo=lo, band_hi=hi,
                band_exact=ex, trunc_eps=float(e.trunc_eps), capped=e.capped_count, seed=e.seed,
                verdict=e.verdict)


def row_verdict(e: TailEstimate, tolerance: float) -> str:
    """Compare an estimate with its band at tolerance max(3 sigma, tolerance)."""
    b = e.band
    if b is None or not math.isfinite(e.p_hat):
        return NA
    if not b.rigorous:
        return ADVISORY
    if e.M_effective and e.capped_count / (e.M_effective + e.capped_count) > CAPPED_LIMIT:
        return ADVISORY
    slack = max(3.0 * e.sigma, tolerance) + e.trunc_eps
    return PASS if b.lo - slack <= e.p_hat <= b.hi + slack else FAIL


def ladder_check(ests: list[TailEstimate]) -> str:
    """|p_hat(n) - limit| non-increasing along increasing n (one method, one r)."""
    ests = sorted(ests, key=lambda e: e.n)
    if len(ests) < 2 or ests[0].band is None or ests[0].band.exact is None:
        return NA
    err = [abs(e.p_hat - e.band.exact) for e in ests]
    return PASS if all(b <= a for a, b in zip(err, err[1:])) else FAIL


def _run_cell(cfg, method, n):
    try:
        if method == "direct":
            return estimate_direct(cfg, n, list(cfg.r_list), allow_capped=True)
        return [estimate_factorized(cfg, n, r, allow_capped=True) for r in cfg.r_list]
    except CappedExcess:  # pragma: no cover - allow_capped suppresses it
        raise


def run_experiment(cfg: ExperimentConfig, method: str | None = None) -> ExperimentReport:
    method = method or cfg.estimator
    methods = ("direct", "factorized") if method == "both" else (method,)
    ests: list[TailEstimate] = []
    for m in methods:
        for n in cfg.n_list:
            ests.extend(_run_cell(cfg, m, n))
    for e in ests:
        e.verdict = row_verdict(e, cfg.tolerance)
    checks = {}
    for m in methods:
        for r in cfg.r_list:
            cell = [e for e in ests if e.method == m and e.r == r]
            if len(cfg.n_list) > 1:
                v = ladder_check(cell)
                if v != NA:
                    checks[f"{m}:r={r!r}:trend"] = v
            final = max(cell, key=lambda e: e.n)
            checks[f"{m}:r={r!r}:limit"] = final.verdict
    return ExperimentReport(cfg, ests, checks)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def to_json(report: ExperimentReport) -> str:
    return json.dumps({"name": report.config.name, "rows": report.rows(), "checks": report.checks},
                      indent=2, sort_keys=False) + "\n"


def dat_files(rows: list[dict]) -> dict[str, str]:
    """One whitespace table per (method, n): r p_hat ci_lo ci_hi band_lo band_hi band_exact."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["method"], row["n"]), []).append(row)
    out = {}
    for (m, n), rs in groups.items():
        lines = ["# r p_hat ci_lo ci_hi band_lo band_hi band_exact"]
        for row in sorted(rs, key=lambda x: x["r"]):
            vals = [row[k] for k in ("r", "p_hat", "ci_lo", "ci_hi", "band_lo", "band_hi", "band_exact")]
            lines.append(" ".join("nan" if v is None else repr(float(v)) for v in vals))
        out[f"{m}_n{n}.dat"] = "\n".join(lines) + "\n"
    return out


def write_report(report: ExperimentReport, out: str | Path | None, fmt: str = "csv") -> str:
    """Write the report (and .dat plot tables beside it); return the rendered text."""
    text = to_csv(report.rows()) if fmt == "csv" else to_json(report)
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        for name, body in dat_files(report.rows()).items():
            (out.parent / f"{out.stem}_{name}").write_text(body)
    return text


def read_rows(path) -> list[dict]:
    """Rows from a CSV or JSON report written by ``write_report``."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)["rows"]
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = dict(raw)
        for k in ("d", "n", "M", "capped", "seed"):
            row[k] = int(row[k])
        for k in ("r", "a_n", "p_hat", "ci_lo", "ci_hi", "trunc_eps", "band_lo", "band_hi", "band_exact"):
            row[k] = float(row[k]) if row[k] != "" else None
        rows.append(row)
    return rows
