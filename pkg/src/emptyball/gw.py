"""Galton-Watson survival numerics and renormalisation scales.

q_n = P(|Z_n| > 0) for a single ancestor obeys q_{n+1} = 1 - f(1 - q_n).
The iteration is carried out on q directly through
``OffspringLaw.one_minus_pgf_of_one_minus`` so that tiny survival
probabilities keep full relative precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoConvergence, RegimeError
from .offspring import OffspringLaw, Regime


@dataclass(frozen=True, eq=False)
class SurvivalSequence:
    law: OffspringLaw
    q: np.ndarray
    n_max: int

    def __getitem__(self, n):
        return self.q[n]


def survival_sequence(law: OffspringLaw, n_max: int) -> SurvivalSequence:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    step = law.one_minus_pgf_of_one_minus
    q = np.empty(n_max + 1)
    cur = 1.0
    q[0] = cur
    for i in range(1, n_max + 1):
        cur = step(cur)
        q[i] = cur
    return SurvivalSequence(law, q, n_max)


def survival_at(law: OffspringLaw, n: int) -> float:
    """q_n without storing the whole sequence."""
    step = law.one_minus_pgf_of_one_minus
    cur = 1.0
    for _ in range(n):
        cur = step(cur)
    return cur


def q_function_at_zero(law: OffspringLaw, tol: float = 1e-10, n_limit: int = 10**5) -> float:
    """Q(0) = lim m^-n q_n for a subcritical law.

    Stops once consecutive ratios agree to relative ``tol``; the ratio error
    is O(q_n), so this happens long before q_n could underflow.
    """
    if law.regime is not Regime.SUBCRITICAL:
        raise RegimeError("Q(0) is defined for subcritical laws only")
    log_m = math.log(law.mean_m)
    step = law.one_minus_pgf_of_one_minus
    q, ratio = 1.0, 1.0
    for n in range(1, n_limit + 1):
        q = step(q)
        if q <= 0.0:
            break
        new_ratio = math.exp(math.log(q) - n * log_m)
        if abs(new_ratio - ratio) < tol * ratio:
            return new_ratio
        ratio = new_ratio
    raise NoConvergence(
        f"m^-n q_n did not stabilise by n = {n_limit}; the law may violate the k log k moment condition"
    )


def survival_constant(law: OffspringLaw) -> float:
    """Limit constant of the survival asymptotics for the law's regime.

    * finite variance critical:  n q_n -> 2 / sigma^2
    * stable critical:           n q_n^beta c -> 1 / beta
    * subcritical:               m^-n q_n -> Q(0)
    """
    if law.regime is Regime.CRITICAL_FINITE_VAR:
        if law.var_sigma2 <= 0:
            raise RegimeError("degenerate law with zero variance has no survival constant")
        return 2.0 / law.var_sigma2
    if law.regime is Regime.CRITICAL_STABLE:
        return 1.0 / law.beta
    return q_function_at_zero(law)


def scale_bn(law: OffspringLaw, n: int, d: int) -> float:
    """b_n = (n c)^(1/(beta d)) for the stable law with constant slowly varying part."""
    if law.regime is not Regime.CRITICAL_STABLE:
        raise RegimeError("b_n is defined for stable offspring laws only")
    _check_beta_dim(law.beta, d)
    return (n * law.c_coef) ** (1.0 / (law.beta * d))


def _check_beta_dim(beta, d):
    if beta > 1.0 / d + 1e-12:
        raise RegimeError(
            f"stable offspring needs beta <= 1/d for the b_n scaling; got beta = {beta:g} with d = {d} "
            f"(1/d = {1.0 / d:g})"
        )


@dataclass(frozen=True)
class ScalePolicy:
    regime: Regime
    d: int
    a_n: Callable[[int], float]
    label: str

    def __call__(self, n: int) -> float:
        return self.a_n(n)


def scale_policy(law: OffspringLaw, d: int) -> ScalePolicy:
    """Renormalisation a_n under which R_n / a_n has a non-degenerate limit."""
    if d < 1:
        raise RegimeError("dimension must be >= 1")
    reg = law.regime
    if reg is Regime.CRITICAL_FINITE_VAR:
        if d == 1:
            return ScalePolicy(reg, d, lambda n: float(n), "n")
        if d == 2:
            return ScalePolicy(reg, d, lambda n: math.sqrt(n), "sqrt(n)")
        return ScalePolicy(reg, d, lambda n: 1.0, "1")
    if reg is Regime.CRITICAL_STABLE:
        _check_beta_dim(law.beta, d)
        return ScalePolicy(reg, d, lambda n: scale_bn(law, n, d), "b_n")
    m = law.mean_m
    return ScalePolicy(reg, d, lambda n: (1.0 / m) ** (n / d), "(1/m)^(n/d)")
