"""Monte Carlo estimators of P(R_n / a_n >= r).

``estimate_direct`` simulates whole Poisson fields restricted to a truncation
window and records the distance from the origin to the nearest
generation-n particle of each field; all radii of one (n, method) cell are
evaluated on the same fields.

``estimate_factorized`` uses P(R_n >= rho) = exp(-I_n), with
I_n = int P_x(Z_n(B(rho)) > 0) dx, and estimates I_n by stratified
single-ancestor runs over radial shells of the window.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ncx2

from ..engine import group_min_distance, norms, propagate, sample_field
from ..errors import CappedExcess, RegimeError
from ..oracle import exact_tail_lattice
from ..limits import TheoryBand, ball_volume, theory_band
from ..rng import cell_tag, task_stream
from ..steps import TruncationWindow, truncation_radius
from .config import ExperimentConfig
from .stats import binomial_sigma, wilson_ci

ANCESTORS_PER_TASK = 100_000
RUNS_PER_TASK = 100_000
CAPPED_LIMIT = 0.01
Z95 = 1.959963984540054


@dataclass
class TailEstimate:
    regime: str
    d: int
    n: int
    r: float
    a_n: float
    method: str
    M_effective: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    sigma: float
    trunc_eps: float
    capped_count: int
    seed: int
    band: TheoryBand | None = None
    verdict: str = ""
    I_hat: float | None = None
    I_sigma: float | None = None
    window_L: float | None = None
    particle_steps: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.p_hat <= 1.0 and self.ci_lo <= self.p_hat <= self.ci_hi):
            raise ValueError(f"inconsistent estimate p={self.p_hat} ci=[{self.ci_lo}, {self.ci_hi}]")


def _pmap(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def band_for(cfg: ExperimentConfig, r: float, n: int | None = None) -> TheoryBand | None:
    """Reference values for a row: the limit band, or the exact value for lattice fields."""
    if cfg.field_mode == "lattice" and n is not None and cfg.d == 1 and cfg.step_law.component == "rademacher":
        v = exact_tail_lattice(cfg.law, n, cfg.a_n(n) * r, cfg.step_law)
        return TheoryBand(cfg.regime, r, v, v, v, "exact lattice recursion")
    if cfg.scale == "raw" and not (cfg.law.regime.value == "CriticalFiniteVar" and cfg.d >= 3):
        return None
    try:
        return theory_band(cfg.law, cfg.step_law, cfg.d, r)
    except (RegimeError, ValueError, ZeroDivisionError, ArithmeticError):
        return None


def window_for(cfg: ExperimentConfig, n: int, rho: float) -> TruncationWindow:
    step = cfg.step_law
    if cfg.field_mode != "lebesgue" and step.bounded:
        # lattice fields with bounded steps: every site that can reach B(rho) is kept
        return TruncationWindow(rho + n * step.reach * math.sqrt(step.d), 0.0, "LatticeRange")
    return truncation_radius(step, cfg.law.mean_m, n, rho, cfg.eps_trunc)


def _check_capped(capped, total, allow_capped):
    if not allow_capped and total and capped / total > CAPPED_LIMIT:
        raise CappedExcess(f"{capped} of {total} runs hit the population cap (> {CAPPED_LIMIT:.0%})")


# ---------------------------------------------------------------- direct ---

def _direct_task(args):
    law, step, window, mode, n, cap, seed, tag, idx, n_fields = args
    rng = task_stream(seed, tag, idx)
    fields = [sample_field(step.d, window, rng, mode) for _ in range(n_fields)]
    sizes = np.array([len(f.ancestors) for f in fields])
    starts = np.concatenate([f.ancestors for f in fields]) if sizes.sum() else np.zeros((0, step.d))
    group = np.repeat(np.arange(n_fields), sizes)
    res = propagate(law, step, starts, n, cap, rng)
    dmin = group_min_distance(res, group, n_fields)
    capped = np.bincount(group, weights=res.capped, minlength=n_fields) > 0
    return dmin, capped, res.particle_steps


def simulate_field_distances(cfg: ExperimentConfig, n: int, rho_max: float):
    """Nearest-particle distance for each of cfg.M fields (inf if none), plus capped flags."""
    window = window_for(cfg, n, rho_max)
    if cfg.field_mode == "lebesgue":
        expected = ball_volume(cfg.d, window.L)
    else:
        expected = (2 * window.L + 1) ** cfg.d
    per_task = int(min(cfg.M, max(1, ANCESTORS_PER_TASK // max(expected, 1.0))))
    tag = cell_tag("direct", cfg.field_mode, n)
    tasks = []
    for i, start in enumerate(range(0, cfg.M, per_task)):
        k = min(per_task, cfg.M - start)
        tasks.append((cfg.law, cfg.step_law, window, cfg.field_mode, n, cfg.cap, cfg.master_seed, tag, i, k))
    out = _pmap(_direct_task, tasks, cfg.workers)
    dmin = np.concatenate([o[0] for o in out])
    capped = np.concatenate([o[1] for o in out])
    steps = sum(o[2] for o in out)
    return dmin, capped, window, steps


def estimate_direct(cfg: ExperimentConfig, n: int, r, allow_capped: bool = False):
    """Direct field simulation. ``r`` may be a scalar or a sequence (common fields)."""
    scalar = np.isscalar(r)
    r_list = [float(r)] if scalar else [float(x) for x in r]
    a_n = cfg.a_n(n)
    dmin, capped, window, steps = simulate_field_distances(cfg, n, a_n * max(r_list))
    n_cap = int(capped.sum())
    _check_capped(n_cap, cfg.M, allow_capped)
    good = dmin[~capped]
    M_eff = len(good)
    ests = []
    for rr in r_list:
        empty = int(np.count_nonzero(good >= a_n * rr))
        p = empty / M_eff if M_eff else math.nan
        lo, hi = wilson_ci(empty, M_eff)
        ests.append(TailEstimate(
            regime=cfg.regime, d=cfg.d, n=n, r=rr, a_n=a_n, method="direct", M_effective=M_eff,
            p_hat=p, ci_lo=lo, ci_hi=hi, sigma=binomial_sigma(p, M_eff), trunc_eps=window.eps_trunc,
            capped_count=n_cap, seed=cfg.master_seed, band=band_for(cfg, rr, n), window_L=window.L,
            particle_steps=steps,
        ))
    return ests[0] if scalar else ests


# ------------------------------------------------------------ factorized ---

def _uniform_in_shells(rng, shell_ids, edges, d):
    lo = edges[shell_ids] ** d
    hi = edges[shell_ids + 1] ** d
    rad = (lo + rng.random(len(shell_ids)) * (hi - lo)) ** (1.0 / d)
    if d == 1:
        sign = rng.integers(0, 2, size=len(shell_ids)) * 2.0 - 1.0
        return (rad * sign)[:, None]
    g = rng.standard_normal((len(shell_ids), d))
    g /= norms(g)[:, None]
    return g * rad[:, None]


def _factorized_task(args):
    law, step, rho, n, cap, seed, tag, idx, shell_ids, edges = args
    rng = task_stream(seed, tag, idx)
    starts = _uniform_in_shells(rng, shell_ids, edges, step.d)
    res = propagate(law, step, starts, n, cap, rng)
    runs = len(shell_ids)
    dmin = group_min_distance(res, np.arange(runs), runs)
    return dmin < rho, res.capped, res.particle_steps


def _run_phase(cfg, law, step, rho, n, counts, edges, tag):
    shell_ids = np.repeat(np.arange(len(counts)), counts)
    tasks = []
    for i, start in enumerate(range(0, len(shell_ids), RUNS_PER_TASK)):
        ids = shell_ids[start:start + RUNS_PER_TASK]
        tasks.append((law, step, rho, n, cfg.cap, cfg.master_seed, tag, i, ids, edges))
    out = _pmap(_factorized_task, tasks, cfg.workers)
    if not out:
        z = np.zeros(len(counts))
        return z, z, 0
    hits = np.concatenate([o[0] for o in out])
    capped = np.concatenate([o[1] for o in out])
    H = len(counts)
    h_hits = np.bincount(shell_ids, weights=hits & ~capped, minlength=H)
    h_capped = np.bincount(shell_ids, weights=capped, minlength=H)
    return h_hits, h_capped, sum(o[2] for o in out)


def _first_moment_guide(law, step, n, rho, edges):
    """m^n P(|x + S_n| < rho) at each shell's inner radius, with S_n taken Gaussian.

    P_x(hit) <= E_x Z_n(B(rho)) = m^n P(|x + S_n| < rho). Only used to steer
    the allocation, so the Gaussian approximation cannot bias the estimate.
    """
    v = step.component_variance
    if not np.isfinite(v) or n == 0:
        return np.ones(len(edges) - 1)
    scale = n * v
    nc = edges[:-1] ** 2 / scale
    guide = law.mean_m**n * ncx2.cdf(rho**2 / scale, step.d, nc)
    return np.clip(guide, 1e-300, 1.0)


def estimate_hit_integral(cfg: ExperimentConfig, n: int, rho: float, budget: int | None = None,
                          allow_capped: bool = False) -> dict:
    """Stratified estimate of I_n = int P_x(Z_n(B(rho)) > 0) dx over the window.

    A pilot phase spends ``pilot_fraction`` of the budget evenly over the
    shells; the remaining runs go to shell h in proportion to
    V_h * sqrt(p_h), with p_h the smoothed pilot hit rate. Only main-phase
    runs enter the estimate.
    """
    budget = budget or cfg.budget
    law, step, d = cfg.law, cfg.step_law, cfg.d
    window = truncation_radius(step, law.mean_m, n, rho, cfg.eps_trunc)
    H = cfg.shells
    edges = np.linspace(0.0, window.L, H + 1)
    vols = np.diff([ball_volume(d, e) for e in edges])
    pilot_each = max(1, int(budget * cfg.pilot_fraction) // H)
    pilot_counts = np.full(H, pilot_each)
    p_hits, p_capped, steps1 = _run_phase(cfg, law, step, rho, n, pilot_counts, edges, cell_tag("pilot", n, rho))
    p_tilde = np.minimum((p_hits + 0.5) / (pilot_counts - p_capped + 1.0),
                         _first_moment_guide(law, step, n, rho, edges))
    weights = vols * np.sqrt(p_tilde)
    main_total = max(H, budget - pilot_each * H)
    main_counts = np.maximum(1, np.floor(main_total * weights / weights.sum())).astype(np.int64)
    hits, capped, steps2 = _run_phase(cfg, law, step, rho, n, main_counts, edges, cell_tag("main", n, rho))
    eff = main_counts - capped
    n_cap = int(capped.sum() + p_capped.sum())
    _check_capped(n_cap, int(main_counts.sum() + pilot_counts.sum()), allow_capped)
    with np.errstate(invalid="ignore", divide="ignore"):
        p_h = np.where(eff > 0, hits / np.maximum(eff, 1), 0.0)
        var_h = np.where(eff > 0, p_h * (1.0 - p_h) / np.maximum(eff, 1), 0.0)
    I_hat = float(np.dot(vols, p_h))
    I_sigma = float(math.sqrt(np.dot(vols**2, var_h)))
    return dict(I_hat=I_hat, I_sigma=I_sigma, window=window, runs=int(eff.sum()), capped=n_cap,
                shell_edges=edges, shell_p=p_h, shell_counts=main_counts, particle_steps=steps1 + steps2)


def estimate_factorized(cfg: ExperimentConfig, n: int, r: float, budget: int | None = None,
                        allow_capped: bool = False) -> TailEstimate:
    a_n = cfg.a_n(n)
    out = estimate_hit_integral(cfg, n, a_n * r, budget, allow_capped)
    I, s, eps = out["I_hat"], out["I_sigma"], out["window"].eps_trunc
    p = math.exp(-I)
    lo = math.exp(-(I + Z95 * s + eps))
    hi = math.exp(-max(I - Z95 * s, 0.0))
    return TailEstimate(
        regime=cfg.regime, d=cfg.d, n=n, r=r, a_n=a_n, method="factorized", M_effective=out["runs"],
        p_hat=p, ci_lo=lo, ci_hi=hi, sigma=p * s, trunc_eps=eps, capped_count=out["capped"],
        seed=cfg.master_seed, band=band_for(cfg, r, n), I_hat=I, I_sigma=s, window_L=out["window"].L,
        particle_steps=out["particle_steps"],
    )
