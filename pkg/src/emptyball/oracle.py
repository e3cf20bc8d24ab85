"""Exact small-instance computations for lattice-valued steps in d = 1.

``h_n(x) = P_x(no generation-n particle in B(r))`` satisfies

    h_0(x) = 1{|x| >= r},    h_k(x) = f( sum_s P(step = s) h_{k-1}(x + s) )

which is evaluated on the finite set of sites from which B(r) is reachable.
A unit-intensity Poisson field on the integers then gives

    P(R_n >= r) = exp(-sum_x (1 - h_n(x))).

``enumerate_tiny`` recomputes the same probabilities by brute-force
enumeration of whole-generation configurations in rational arithmetic.
"""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import TooLarge, UnsupportedLaw
from .offspring import OffspringLaw
from .steps import StepLaw


@dataclass(frozen=True, eq=False)
class NoHitTable:
    xs: np.ndarray
    h: np.ndarray
    n: int
    r: float
    law: OffspringLaw
    offset: float = 0.0

    def at(self, x: int) -> float:
        i = int(x) - int(self.xs[0])
        if 0 <= i < len(self.xs):
            return float(self.h[i])
        return 1.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "h_n"])
            for x, v in zip(self.xs, self.h):
                w.writerow([int(x), repr(float(v))])


def lattice_step(step) -> tuple[np.ndarray, np.ndarray]:
    """(offsets, probabilities) for a Rademacher StepLaw or an {offset: prob} mapping."""
    if isinstance(step, StepLaw):
        if step.component != "rademacher" or step.d != 1:
            raise UnsupportedLaw("the oracle needs integer-valued steps in d = 1")
        return np.array([-1, 1]), np.array([0.5, 0.5])
    items = sorted(dict(step).items())
    offs = np.array([int(k) for k, _ in items])
    if not np.all(offs == np.array([k for k, _ in items])):
        raise UnsupportedLaw("lattice step offsets must be integers")
    probs = np.array([float(v) for _, v in items])
    if abs(probs.sum() - 1.0) > 1e-12 or np.any(probs < 0):
        raise UnsupportedLaw("lattice step probabilities must form a distribution")
    return offs, probs


def dp_no_hit(law: OffspringLaw, n: int, r: float, step, offset: float = 0.0) -> NoHitTable:
    """h_n on all integer sites x whose start point x + offset can reach B(r).

    Any law with an exact generating function is accepted; finite tables,
    binary, geometric and stable laws all qualify.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    offs, probs = lattice_step(step)
    reach = int(np.abs(offs).max())
    R = n * reach + int(math.ceil(r + abs(offset))) + 1
    xs = np.arange(-R, R + 1)
    h = (np.abs(xs + offset) >= r).astype(float)
    pad = reach
    for _ in range(n):
        padded = np.concatenate([np.ones(pad), h, np.ones(pad)])
        avg = np.zeros_like(h)
        for s, p in zip(offs, probs):
            avg += p * padded[pad + s: pad + s + len(h)]
        h = np.clip(law.pgf(np.clip(avg, 0.0, 1.0)), 0.0, 1.0)
    return NoHitTable(xs, h, n, r, law, offset)


def exact_tail_lattice(law: OffspringLaw, n: int, r: float, step) -> float:
    """P(no generation-n particle in B(r)) for a unit Poisson field on the integers."""
    tab = dp_no_hit(law, n, r, step)
    return math.exp(-math.fsum(1.0 - tab.h))


def hit_integral_continuum(law: OffspringLaw, n: int, r: float, step) -> float:
    """int_R P_x(Z_n(B(r)) > 0) dx for integer-valued steps.

    Writing x = k + u with k integer, the summand over k is piecewise
    constant in u in [0, 1) with jumps only where |k + u| = r, so one DP per
    piece integrates it exactly.
    """
    frac = r - math.floor(r)
    cuts = sorted({0.0, 1.0, frac, (1.0 - frac) % 1.0})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        tab = dp_no_hit(law, n, r, step, offset=0.5 * (a + b))
        total += (b - a) * math.fsum(1.0 - tab.h)
    return total


def exact_tail_continuum(law: OffspringLaw, n: int, r: float, step) -> float:
    """P(R_n >= r) for the Lebesgue-intensity Poisson field with lattice steps."""
    return math.exp(-hit_integral_continuum(law, n, r, step))


def u_integral(law: OffspringLaw, n: int, r: float, step) -> float:
    """sum_x -log h_n(x); +inf when some site has h_n(x) = 0."""
    tab = dp_no_hit(law, n, r, step)
    if np.any(tab.h <= 0.0):
        return math.inf
    return math.fsum(-np.log(tab.h))


def _rational_law(law: OffspringLaw) -> dict[int, Fraction]:
    p = law.pmf(2)
    if law.kind == "table" and len(law.probs) > 3 and np.any(law.probs[3:] > 0):
        raise TooLarge("enumeration supports offspring counts in {0, 1, 2} only")
    if law.kind in ("geometric",) or (law.kind == "stable" and law.beta < 1):
        raise TooLarge("enumeration supports offspring counts in {0, 1, 2} only")
    return {k: Fraction(float(v)) for k, v in enumerate(p) if v > 0}


def enumerate_tiny(law: OffspringLaw, n: int, r: float, x0: int = 0, step=None) -> Fraction:
    """P_{x0}(some generation-n particle in B(r)) by exhaustive enumeration.

    States are multisets of generation positions; every combination of
    offspring counts and step assignments is expanded with exact rational
    weights.
    """
    if n > 3:
        raise TooLarge("enumerate_tiny is limited to n <= 3")
    pk = _rational_law(law)
    if step is None:
        steps = {-1: Fraction(1, 2), 1: Fraction(1, 2)}
    else:
        offs, probs = lattice_step(step)
        steps = {int(o): Fraction(float(p)) for o, p in zip(offs, probs)}

    def children_dist(x):
        out = defaultdict(Fraction)
        for k, pw in pk.items():
            for moves in product(steps.items(), repeat=k):
                w = pw
                for _, ps in moves:
                    w *= ps
                out[tuple(sorted(x + s for s, _ in moves))] += w
        return out

    states = {(int(x0),): Fraction(1)}
    for _ in range(n):
        new = defaultdict(Fraction)
        for config, w in states.items():
            acc = {(): w}
            for x in config:
                nxt = defaultdict(Fraction)
                kids = children_dist(x)
                for part, pw in acc.items():
                    for c, pc in kids.items():
                        nxt[tuple(sorted(part + c))] += pw * pc
                acc = nxt
            for c, pw in acc.items():
                new[c] += pw
        states = new
    return sum((w for c, w in states.items() if any(abs(x) < r for x in c)), Fraction(0))
