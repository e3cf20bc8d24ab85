"""Offspring laws {p_k}: generating functions, moments and samplers.

Four kinds are supported:

* ``table``     -- an explicit finite list p_0..p_K
* ``binary``    -- critical binary splitting, p_0 = p_2 = 1/2
* ``geometric`` -- p_k = (1-q) q^k parameterised by its mean m < 1
* ``stable``    -- f(s) = s + c (1-s)^(1+beta), the critical law in the
  domain of attraction of a (1+beta)-stable law (slowly varying part held
  constant at c)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import DomainError, InvalidParameters

STABLE_KMAX = 10**6
_SMALL_TABLE = 64


class Regime(str, Enum):
    CRITICAL_FINITE_VAR = "CriticalFiniteVar"
    CRITICAL_STABLE = "CriticalStable"
    SUBCRITICAL = "Subcritical"


@dataclass(frozen=True, eq=False)
class OffspringLaw:
    kind: str
    mean_m: float
    var_sigma2: float
    regime: Regime
    probs: np.ndarray | None = field(default=None, repr=False)
    beta: float | None = None
    c_coef: float | None = None
    geo_q: float | None = None
    k_max: int = STABLE_KMAX

    # -- generating function -------------------------------------------------
    def pgf(self, s):
        """f(s) = sum_k p_k s^k, vectorised over ``s``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "binary":
            return 0.5 * (1.0 + s * s)
        if self.kind == "geometric":
            q = self.geo_q
            return (1.0 - q) / (1.0 - q * s)
        if self.kind == "stable":
            return s + self.c_coef * np.power(np.clip(1.0 - s, 0.0, None), 1.0 + self.beta)
        return np.polynomial.polynomial.polyval(s, self.probs)

    def one_minus_pgf_of_one_minus(self, q: float) -> float:
        """1 - f(1 - q) without the cancellation of the naive formula.

        This is the map q_n -> q_{n+1} of survival probabilities.
        """
        if self.kind == "binary":
            return q - 0.5 * q * q
        if self.kind == "geometric":
            g = self.geo_q
            return g * q / (1.0 - g + g * q)
        if self.kind == "stable":
            return q - self.c_coef * q ** (1.0 + self.beta)
        if q == 0.0:
            return 0.0
        if q >= 1.0:
            return 1.0 - float(self.probs[0])
        lq = math.log1p(-q)
        return math.fsum(-p * math.expm1(k * lq) for k, p in enumerate(self.probs) if p)

    # -- pmf -----------------------------------------------------------------
    @cached_property
    def _stable_table(self) -> np.ndarray:
        b, c = self.beta, self.c_coef
        K = self.k_max
        p = np.zeros(K + 1)
        p[0] = c
        p[1] = 1.0 - c * (1.0 + b)
        if K >= 2:
            ratios = (np.arange(2, K, dtype=float) - 1.0 - b) / np.arange(3, K + 1, dtype=float)
            p[2] = c * (1.0 + b) * b / 2.0
            p[3:] = p[2] * np.cumprod(ratios)
        return p

    def pmf(self, kmax: int) -> np.ndarray:
        """p_0..p_kmax as an array (zeros beyond a finite support)."""
        k = np.arange(kmax + 1)
        if self.kind == "binary":
            return np.where(k == 0, 0.5, 0.0) + np.where(k == 2, 0.5, 0.0)
        if self.kind == "geometric":
            return (1.0 - self.geo_q) * self.geo_q ** k
        if self.kind == "stable":
            if kmax <= self.k_max:
                return self._stable_table[: kmax + 1].copy()
            return _stable_pmf(self.beta, self.c_coef, kmax)
        out = np.zeros(kmax + 1)
        m = min(kmax + 1, len(self.probs))
        out[:m] = self.probs[:m]
        return out

    def stable_tail_constant(self) -> float:
        """A with p_k ~ A k^-(2+beta) as k -> infinity."""
        b = self.beta
        if b >= 1.0:
            return 0.0
        return self.c_coef * b * (1.0 + b) / math.gamma(1.0 - b)

    def stable_tail_remainder(self, K: int) -> float:
        """Analytic approximation of sum_{k>K} p_k for the stable kind."""
        b = self.beta
        return self.stable_tail_constant() * K ** (-(1.0 + b)) / (1.0 + b)

    @cached_property
    def _cdf(self) -> np.ndarray:
        if self.kind == "stable":
            cdf = np.cumsum(self._stable_table)
            if self.beta == 1.0:
                cdf /= cdf[-1]
        else:
            cdf = np.cumsum(self.probs)
            cdf /= cdf[-1]
        return cdf

    # -- sampling ------------------------------------------------------------
    def sample_counts(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` iid offspring counts as an int64 array."""
        if self.kind == "binary":
            return rng.integers(0, 2, size=size, dtype=np.int64) * 2
        if self.kind == "geometric":
            return rng.geometric(1.0 - self.geo_q, size=size).astype(np.int64) - 1
        u = rng.random(size)
        cdf = self._cdf
        if self.kind == "table":
            return np.searchsorted(cdf, u, side="right").astype(np.int64)
        small = min(_SMALL_TABLE, len(cdf))
        k = np.searchsorted(cdf[:small], u, side="right").astype(np.int64)
        far = k == small
        if far.any():
            k[far] = np.searchsorted(cdf, u[far], side="right")
            tail = k == len(cdf)
            if tail.any():
                k[tail] = self._sample_tail(rng, int(tail.sum()))
        return k

    def _sample_tail(self, rng, size):
        # p_k ~ A k^-(2+beta) beyond the table: P(K > k | K > K_max) ~ (K_max/k)^(1+beta)
        K = self.k_max
        v = rng.random(size)
        x = (K + 0.5) * v ** (-1.0 / (1.0 + self.beta))
        x = np.minimum(x, 2.0**62)
        return np.maximum(np.floor(x + 0.5).astype(np.int64), K + 1)

    def __repr__(self):
        parts = [f"kind={self.kind!r}", f"m={self.mean_m:g}", f"sigma2={self.var_sigma2:g}"]
        if self.kind == "stable":
            parts += [f"beta={self.beta:g}", f"c={self.c_coef:g}"]
        return f"OffspringLaw({', '.join(parts)})"


def _stable_pmf(beta, c, kmax):
    p = np.zeros(kmax + 1)
    p[0] = c
    if kmax >= 1:
        p[1] = 1.0 - c * (1.0 + beta)
    if kmax >= 2:
        p[2] = c * (1.0 + beta) * beta / 2.0
    if kmax >= 3:
        ratios = (np.arange(2, kmax, dtype=float) - 1.0 - beta) / np.arange(3, kmax + 1, dtype=float)
        p[3:] = p[2] * np.cumprod(ratios)
    return p


def _check_standing(p0, p1, allow_degenerate):
    if allow_degenerate:
        return
    if p0 >= 1.0 or p1 >= 1.0:
        raise InvalidParameters("offspring law must satisfy p_0 < 1 and p_1 < 1")


def binary_critical() -> OffspringLaw:
    return OffspringLaw(
        kind="binary", mean_m=1.0, var_sigma2=1.0, regime=Regime.CRITICAL_FINITE_VAR,
        probs=np.array([0.5, 0.0, 0.5]),
    )


def geometric(m: float) -> OffspringLaw:
    """Geometric law p_k = (1-q) q^k with mean m = q/(1-q), 0 < m < 1."""
    if not 0.0 < m < 1.0:
        raise InvalidParameters(f"geometric mean must lie in (0, 1), got {m}")
    q = m / (1.0 + m)
    return OffspringLaw(
        kind="geometric", mean_m=m, var_sigma2=m * (1.0 + m), regime=Regime.SUBCRITICAL, geo_q=q,
    )


def stable(beta: float, c: float, k_max: int = STABLE_KMAX) -> OffspringLaw:
    """Critical law with f(s) = s + c (1-s)^(1+beta).

    Requires beta in (0, 1] and c in (0, 1/(1+beta)] so that p_1 >= 0.
    The variance is infinite for beta < 1 and equals 2c at beta = 1.
    """
    if not 0.0 < beta <= 1.0:
        raise InvalidParameters(f"stability index beta must lie in (0, 1], got {beta}")
    if not 0.0 < c <= 1.0 / (1.0 + beta) + 1e-15:
        raise InvalidParameters(
            f"coefficient c must lie in (0, 1/(1+beta)] = (0, {1.0 / (1.0 + beta):.6g}], got {c}"
        )
    if k_max < 2:
        raise InvalidParameters("k_max must be at least 2")
    var = 2.0 * c if beta == 1.0 else math.inf
    if beta == 1.0:
        k_max = 2
    return OffspringLaw(
        kind="stable", mean_m=1.0, var_sigma2=var, regime=Regime.CRITICAL_STABLE,
        beta=float(beta), c_coef=float(c), k_max=int(k_max),
    )


def table(probs, allow_degenerate: bool = False) -> OffspringLaw:
    """Law given by an explicit finite list p_0..p_K.

    ``allow_degenerate`` admits p_0 = 1 or p_1 = 1, which are excluded by the
    standing assumptions but are handy as deterministic test cases.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise InvalidParameters("probs must be a non-empty 1-d sequence")
    if np.any(p < 0):
        raise InvalidParameters("probabilities must be non-negative")
    if abs(math.fsum(p) - 1.0) > 1e-12:
        raise InvalidParameters(f"probabilities sum to {math.fsum(p)!r}, not 1")
    p1 = p[1] if len(p) > 1 else 0.0
    _check_standing(p[0], p1, allow_degenerate)
    k = np.arange(len(p))
    m = math.fsum(k * p)
    var = max(math.fsum(k * k * p) - m * m, 0.0)
    if abs(m - 1.0) <= 1e-12:
        m = 1.0
        regime = Regime.CRITICAL_FINITE_VAR
    elif m < 1.0:
        regime = Regime.SUBCRITICAL
    else:
        raise InvalidParameters(f"supercritical law (m = {m:g}) is not supported")
    return OffspringLaw(kind="table", mean_m=m, var_sigma2=var, regime=regime, probs=p)


def make_offspring(kind: str, **params) -> OffspringLaw:
    """Build a validated law from a kind name and keyword parameters.

    >>> make_offspring("stable", beta=0.5, c=2/3).pmf(2)
    array([0.66666667, 0.        , 0.25      ])
    """
    kind = kind.lower()
    try:
        if kind in ("binary", "binarycritical", "binary_critical"):
            return binary_critical()
        if kind == "geometric":
            return geometric(float(params["m"]))
        if kind == "stable":
            return stable(float(params["beta"]), float(params["c"]),
                          int(params.get("k_max", STABLE_KMAX)))
        if kind == "table":
            return table(params["probs"], bool(params.get("allow_degenerate", False)))
    except KeyError as exc:
        raise InvalidParameters(f"missing parameter {exc.args[0]!r} for offspring kind {kind!r}")
    raise InvalidParameters(f"unknown offspring kind {kind!r}")


def pgf(law: OffspringLaw, s: float) -> float:
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"pgf argument must lie in [0, 1], got {s}")
    return float(law.pgf(s))


def sample_count(law: OffspringLaw, rng: np.random.Generator) -> int:
    return int(law.sample_counts(rng, 1)[0])


def mean_var(law: OffspringLaw) -> tuple[float, float]:
    return law.mean_m, law.var_sigma2
