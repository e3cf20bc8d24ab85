"""Branching random walk simulator.

Each generation every particle dies, leaves a random number of children
drawn from the offspring law, and each child is displaced by an independent
step (branch, then move). Only the current generation is stored.

The batched kernel ``propagate`` advances many independent lineages at once;
each particle carries the index of the ancestor ("owner") it descends from so
that per-lineage population caps and per-group hit statistics can be read
off with ``bincount``/``minimum.at``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .limits import ball_volume
from .offspring import OffspringLaw
from .steps import StepLaw, TruncationWindow

DEFAULT_CAP = 10**7


@dataclass
class GenerationBuffer:
    positions: np.ndarray
    generation_index: int
    capped: bool = False
    particle_steps: int = 0

    @property
    def count(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class BatchResult:
    positions: np.ndarray
    owner: np.ndarray
    capped: np.ndarray
    particle_steps: int


def propagate(
    law: OffspringLaw, step: StepLaw, starts: np.ndarray, n: int, cap: int,
    rng: np.random.Generator,
) -> BatchResult:
    """Run one independent lineage from each row of ``starts`` for n generations.

    A lineage whose generation size exceeds ``cap`` is aborted (its particles
    are dropped) and flagged in ``capped``.
    """
    starts = np.asarray(starts, dtype=float).reshape(-1, step.d)
    n_owners = len(starts)
    pos = starts.copy()
    owner = np.arange(n_owners, dtype=np.int64)
    capped = np.zeros(n_owners, dtype=bool)
    steps_done = 0
    for _ in range(n):
        if len(pos) == 0:
            break
        counts = law.sample_counts(rng, len(pos))
        big = counts > cap
        if big.any():
            capped[owner[big]] = True
        total = int(counts.sum()) if not big.any() else cap + 1
        if total > cap:
            sizes = np.bincount(owner, weights=np.minimum(counts, cap + 1).astype(float), minlength=n_owners)
            capped |= sizes > cap
        if capped.any():
            counts[capped[owner]] = 0
        total = int(counts.sum())
        pos = np.repeat(pos, counts, axis=0)
        owner = np.repeat(owner, counts)
        pos += step.sample(rng, total)
        steps_done += total
    return BatchResult(pos, owner, capped, steps_done)


def norms(pos: np.ndarray) -> np.ndarray:
    if pos.shape[1] == 1:
        return np.abs(pos[:, 0])
    return np.sqrt(np.einsum("ij,ij->i", pos, pos))


def group_min_distance(res: BatchResult, group_of_owner: np.ndarray, n_groups: int) -> np.ndarray:
    """Smallest |position| in each group of lineages (inf for groups with no particle)."""
    out = np.full(n_groups, np.inf)
    if len(res.positions):
        np.minimum.at(out, group_of_owner[res.owner], norms(res.positions))
    return out


def simulate_generations(
    law: OffspringLaw, step: StepLaw, start, n: int, rng: np.random.Generator,
    cap: int = DEFAULT_CAP,
) -> GenerationBuffer:
    """Generation-n particles of a single-ancestor walk started at ``start``."""
    if n < 0 or cap < 1:
        raise ValueError("need n >= 0 and cap >= 1")
    res = propagate(law, step, np.atleast_2d(start), n, cap, rng)
    return GenerationBuffer(res.positions, n, bool(res.capped[0]), res.particle_steps)


def hits_ball(
    law: OffspringLaw, step: StepLaw, start, n: int, radius: float, rng: np.random.Generator,
    cap: int = DEFAULT_CAP,
) -> tuple[bool, bool]:
    """(some generation-n particle has |x| < radius, capped flag)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    buf = simulate_generations(law, step, start, n, rng, cap)
    if buf.capped:
        return False, True
    return bool(np.any(norms(buf.positions) < radius)), False


@dataclass(frozen=True)
class FieldSample:
    ancestors: np.ndarray
    window: TruncationWindow
    mode: str
    rng_seed: int | None = None


def lattice_sites(d: int, L: float) -> np.ndarray:
    """Integer points x with |x| <= L."""
    R = int(math.floor(L))
    axis = np.arange(-R, R + 1, dtype=float)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return grid[norms(grid) <= L]


def uniform_in_ball(rng: np.random.Generator, size: int, d: int, L: float) -> np.ndarray:
    if d == 1:
        return rng.uniform(-L, L, size=(size, 1))
    g = rng.standard_normal((size, d))
    g /= norms(g)[:, None]
    rad = L * rng.random(size) ** (1.0 / d)
    return g * rad[:, None]


def sample_field(d: int, window: TruncationWindow, rng: np.random.Generator, mode: str = "lebesgue",
                 rng_seed: int | None = None) -> FieldSample:
    """Initial ancestors restricted to the window ball of radius ``window.L``.

    ``lebesgue``: Poisson(v_d(L)) points iid uniform in the ball.
    ``lattice``: Poisson(1) ancestors stacked on every integer site in the ball.
    """
    mode = mode.lower()
    if mode in ("lebesgue", "continuum"):
        k = rng.poisson(ball_volume(d, window.L))
        anc = uniform_in_ball(rng, k, d, window.L)
    elif mode in ("lattice", "unitlattice", "unit_lattice"):
        sites = lattice_sites(d, window.L)
        reps = rng.poisson(1.0, size=len(sites))
        anc = np.repeat(sites, reps, axis=0)
    else:
        raise ValueError(f"unknown field mode {mode!r}")
    return FieldSample(anc, window, mode, rng_seed)


@dataclass(frozen=True)
class RnOutcome:
    r_n: float
    truncation_eps: float
    capped: bool
    particle_steps: int = 0


def simulate_rn(
    field: FieldSample, law: OffspringLaw, step: StepLaw, n: int, target_radius: float,
    rng: np.random.Generator, cap: int = DEFAULT_CAP,
) -> RnOutcome:
    """Distance from the origin to the nearest generation-n particle of the field.

    Only distances below ``target_radius`` are certified by the window; a
    field with no particle inside B(target_radius) reports r_n = inf.
    """
    if target_radius > field.window.L:
        raise ValueError("target_radius exceeds the window radius")
    res = propagate(law, step, field.ancestors, n, cap, rng)
    if res.capped.any():
        return RnOutcome(math.nan, field.window.eps_trunc, True, res.particle_steps)
    d_min = float(norms(res.positions).min()) if len(res.positions) else math.inf
    r_n = d_min if d_min < target_radius else math.inf
    return RnOutcome(r_n, field.window.eps_trunc, False, res.particle_steps)
