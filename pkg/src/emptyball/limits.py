"""Limit values and bounds for P(R_n / a_n >= r) in each regime."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MomentUnavailable, RegimeError
from .gw import _check_beta_dim, q_function_at_zero
from .offspring import OffspringLaw, Regime
from .steps import StepLaw, abs_moment

D2_CORRIDOR_K = 2.0


@dataclass(frozen=True)
class TheoryBand:
    regime: str
    r: float
    lo: float
    hi: float
    exact: float | None
    description: str
    rigorous: bool = True
    advisory_lo: float | None = None
    advisory_hi: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ValueError(f"invalid band [{self.lo}, {self.hi}]")


def ball_volume(d: int, r: float) -> float:
    """Volume pi^(d/2) r^d / Gamma(d/2 + 1) of the radius-r ball in R^d."""
    return math.pi ** (d / 2.0) * r**d / math.gamma(d / 2.0 + 1.0)


def cd_r(step: StepLaw, d: int, r: float) -> float:
    """C_d(r) = 2 [1 + 6 E|X1|^3 / (r E|X1|^2^(3/2))]^d / (d - 2) + 1, d >= 3."""
    if d < 3:
        raise RegimeError("C_d(r) is defined for d >= 3")
    if r <= 0:
        raise ValueError("r must be positive")
    m3 = abs_moment(step, 3)
    m2 = abs_moment(step, 2)
    bracket = 1.0 + 6.0 * m3 / (r * m2**1.5)
    return 2.0 * bracket**d / (d - 2.0) + 1.0


def theory_band(law: OffspringLaw, step: StepLaw | None, d: int, r: float) -> TheoryBand:
    """Limit (or bounds on the limit) of P(R_n / a_n >= r).

    For d = 2 the certified band is the trivial [0, 1]; an advisory corridor
    exp(-K 2 pi r^2 / sigma^2) .. exp(-2 pi r^2 / (K sigma^2)) with K = 2 is
    attached for trend plots only.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    reg = law.regime
    v = ball_volume(d, r)
    if reg is Regime.CRITICAL_FINITE_VAR:
        s2 = law.var_sigma2
        if d == 1:
            val = math.exp(-4.0 * r / s2)
            return TheoryBand(reg.value, r, val, val, val, "exp(-4r/sigma^2)")
        if d == 2:
            base = 2.0 * math.pi * r * r / s2
            K = D2_CORRIDOR_K
            return TheoryBand(
                reg.value, r, 0.0, 1.0, None,
                f"advisory corridor exp(-K*2pi r^2/sigma^2)..exp(-2pi r^2/(K sigma^2)), K={K:g}; non-rigorous",
                rigorous=False, advisory_lo=math.exp(-K * base), advisory_hi=math.exp(-base / K),
            )
        if step is None:
            raise MomentUnavailable("the d >= 3 band needs the step law's third moment")
        C = cd_r(step, d, r)
        lo = math.exp(-v)
        hi = math.exp(-v / (1.0 + s2 * C * r * r))
        return TheoryBand(reg.value, r, lo, hi, None, "[exp(-v_d(r)), exp(-v_d(r)/(1+sigma^2 C_d(r) r^2))]")
    if reg is Regime.CRITICAL_STABLE:
        _check_beta_dim(law.beta, d)
        inv = 1.0 / law.beta
        val = math.exp(-v * inv**inv)
        return TheoryBand(reg.value, r, val, val, val, "exp(-v_d(r) (1/beta)^(1/beta))")
    if reg is Regime.SUBCRITICAL:
        Q0 = q_function_at_zero(law)
        val = math.exp(-Q0 * v)
        return TheoryBand(reg.value, r, val, val, val, f"exp(-Q(0) v_d(r)), Q(0)={Q0:.10g}")
    raise RegimeError(f"unsupported regime {reg}")
