"""Displacement laws with iid components, their tails, and truncation windows.

A step X in R^d has iid mean-zero components drawn from one of

* ``gaussian``   -- standard normal
* ``rademacher`` -- +1 or -1 with probability 1/2 each
* ``uniform``    -- uniform on (-a, a)
* ``pareto``     -- symmetric Pareto, |X| has density alpha0 t^-(alpha0+1) on t >= 1

The truncation window answers: how far out must initial ancestors be kept so
that the ones left out contribute at most ``eps`` to the hit integral?
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .errors import InvalidParameters, MomentUnavailable, WindowUnbounded

COMPONENTS = ("gaussian", "rademacher", "uniform", "pareto")
_ALIASES = {
    "standardgaussian": "gaussian", "normal": "gaussian", "gauss": "gaussian",
    "paretosymmetric": "pareto",
}


@dataclass(frozen=True)
class StepLaw:
    d: int
    component: str
    param: float | None = None
    abs_moments: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise InvalidParameters(f"dimension must be a positive integer, got {self.d}")
        if self.component not in COMPONENTS:
            raise InvalidParameters(f"unknown step component {self.component!r}")
        if self.component == "uniform" and not (self.param and self.param > 0):
            raise InvalidParameters("uniform steps need a half-width a > 0")
        if self.component == "pareto" and not (self.param and self.param > 1):
            raise InvalidParameters("symmetric Pareto steps need tail index alpha0 > 1 for a mean")
        for k in (1, 2, 3, self.alpha):
            if math.isfinite(k) and k < self.alpha:
                self.abs_moments[k] = _abs_moment(self, k)

    @property
    def alpha(self) -> float:
        """Supremum of finite absolute-moment orders (not attained for Pareto)."""
        return self.param if self.component == "pareto" else math.inf

    @property
    def bounded(self) -> bool:
        return self.component in ("rademacher", "uniform")

    @property
    def reach(self) -> float:
        """Almost-sure bound on |X^(1)| (inf for unbounded components)."""
        if self.component == "rademacher":
            return 1.0
        if self.component == "uniform":
            return float(self.param)
        return math.inf

    @property
    def component_variance(self) -> float:
        return _abs_moment(self, 2) if 2 < self.alpha else math.inf

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` iid steps as an array of shape (size, d)."""
        shape = (size, self.d)
        if self.component == "gaussian":
            return rng.standard_normal(shape)
        if self.component == "rademacher":
            return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
        if self.component == "uniform":
            return rng.uniform(-self.param, self.param, size=shape)
        mag = rng.random(shape) ** (-1.0 / self.param)
        sign = rng.integers(0, 2, size=shape) * 2 - 1
        return mag * sign


def make_step(component: str, d: int = 1, param: float | None = None, **kw) -> StepLaw:
    comp = component.lower()
    comp = _ALIASES.get(comp, comp)
    if param is None:
        param = kw.get("a", kw.get("alpha0"))
    if comp == "uniform" and param is None:
        param = 1.0
    return StepLaw(int(d), comp, None if param is None else float(param))


def sample_step(law: StepLaw, rng: np.random.Generator) -> np.ndarray:
    return law.sample(rng, 1)[0]


def _abs_moment(law: StepLaw, k: float) -> float:
    c = law.component
    if c == "gaussian":
        return 2.0 ** (k / 2.0) * math.gamma((k + 1.0) / 2.0) / math.sqrt(math.pi)
    if c == "rademacher":
        return 1.0
    if c == "uniform":
        return law.param**k / (k + 1.0)
    a0 = law.param
    return a0 / (a0 - k)


def abs_moment(law: StepLaw, k: float) -> float:
    """E|X^(1)|^k for k >= 1."""
    if k < 1:
        raise InvalidParameters("moment order must be >= 1")
    if not k < law.alpha:
        raise MomentUnavailable(f"E|X|^{k} is infinite for tail index {law.alpha}")
    if k not in law.abs_moments:
        law.abs_moments[k] = _abs_moment(law, k)
    return law.abs_moments[k]


def nagaev_order(law: StepLaw) -> float:
    """Moment order used in the power-law deviation bound (kept inside [1, 2])."""
    return min(2.0, 1.0 + 0.9 * (law.alpha - 1.0))


def nagaev_constant(law: StepLaw, alpha: float) -> float:
    """C_1 = (2^a + 2^(a-1) e) E|X|^a for a in [1, 2]."""
    m = abs_moment(law, alpha)
    return (2.0**alpha + 2.0 ** (alpha - 1.0) * math.e) * m


def tail_bound(law: StepLaw, n: int, x: float) -> float:
    """Certified upper bound on P(|W_n^(1)| >= x n) for one component."""
    if x <= 0:
        return 1.0
    c = law.component
    if c == "gaussian":
        b = special.erfc(x * math.sqrt(n) / math.sqrt(2.0))
    elif law.bounded:
        a = law.reach
        b = 2.0 * math.exp(-n * x * x / (2.0 * a * a))
    else:
        alpha = nagaev_order(law)
        b = 1.0
        # the explicit constant only holds once (nx/2)^alpha >= 4 n E|X|^alpha
        if (n * x / 2.0) ** alpha >= 4.0 * n * abs_moment(law, alpha):
            b = 2.0 * nagaev_constant(law, alpha) / (n ** (alpha - 1.0) * x**alpha)
        if law.alpha > 2:
            b = min(b, law.component_variance / (n * x * x))
    return min(1.0, float(b))


def radial_tail_bound(law: StepLaw, n: int, t: float) -> float:
    """Certified upper bound on P(|W_n| >= t) for the d-dimensional walk.

    Exact chi tail for Gaussian steps; otherwise a union bound over the d
    components, each at level t / sqrt(d).
    """
    if t <= 0:
        return 1.0
    d = law.d
    if law.component == "gaussian":
        return float(stats.chi.sf(t / math.sqrt(n), d))
    if d == 1:
        return tail_bound(law, n, t / n)
    return min(1.0, d * tail_bound(law, n, t / (math.sqrt(d) * n)))


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class TruncationWindow:
    L: float
    eps_trunc: float
    method: str
    certified: bool = True

    def __post_init__(self):
        if not 0.0 <= self.eps_trunc < 1.0:
            raise InvalidParameters(f"window neglected mass must lie in [0, 1), got {self.eps_trunc}")


def _method_name(law: StepLaw) -> str:
    if law.component == "gaussian":
        return "GaussianTail"
    if law.bounded:
        return "Hoeffding"
    return "Nagaev"


class _NeglectedMass:
    """s -> int_{|x| > rho + s} min(1, m^n P(|W_n| >= |x| - rho)) dx."""

    def __init__(self, law, m, n, rho, tail=None):
        self.law, self.rho = law, rho
        self.weight = m**n
        self.tail = tail or (lambda u: radial_tail_bound(law, n, u))
        self.stepwise = tail is not None
        self.u_max = law.reach * math.sqrt(law.d) * n if law.bounded else math.inf
        self.area = sphere_area(law.d)
        # power-law tails in the Nagaev/Chebyshev branch must beat the volume growth
        if law.component == "pareto":
            order = 2.0 if law.alpha > 2 else nagaev_order(law)
            if order <= law.d:
                self.divergent = True
                return
        self.divergent = False

    def integrand(self, u):
        return min(1.0, self.weight * self.tail(u)) * self.area * (u + self.rho) ** (self.law.d - 1)

    def _quad(self, a, b):
        if not self.stepwise:
            return integrate.quad(self.integrand, a, b, epsrel=1e-4, limit=200)[0]
        # empirical tails are step functions; quad's subdivision warnings are expected there
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(self.integrand, a, b, epsrel=1e-4, limit=200)[0]

    def __call__(self, s):
        if self.divergent:
            return math.inf
        if s >= self.u_max:
            return 0.0
        if math.isfinite(self.u_max):
            return self._quad(s, self.u_max)
        # unbounded tails: integrate piecewise over doubling blocks until negligible
        total, lo, width = 0.0, s, max(1.0, s, self.rho)
        for _ in range(200):
            val = self._quad(lo, lo + width)
            total += val
            lo += width
            width *= 2.0
            if val <= 1e-6 * total or val < 1e-300:
                return total + self._quad(lo, math.inf)
        return math.inf


def _search_grid(scale, hi, extra=()):
    grid = [0.0]
    s = 1e-3 * scale
    while s < hi:
        grid.append(s)
        s *= 1.05
    grid.append(hi)
    grid.extend(x for x in extra if 0 < x < hi)
    return sorted(set(grid))


def truncation_radius(
    law: StepLaw, offspring_mean: float, n: int, ball_radius: float, eps: float,
    method: str = "auto", rng: np.random.Generator | None = None, n_walks: int = 10**6,
) -> TruncationWindow:
    """Smallest window radius L (on a geometric grid) with neglected hit mass <= eps.

    Ancestors at |x| > L are dropped from simulation; by the first-moment
    bound P_x(hit) <= m^n P(|W_n| >= |x| - ball_radius) they carry at most
    ``eps`` of the hit integral in total.

    ``method="empirical"`` replaces the analytic tail with three times the
    empirical tail of ``n_walks`` simulated walks; such windows are flagged
    ``certified=False``.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidParameters(f"eps must lie in (0, 1), got {eps}")
    if ball_radius < 0:
        raise InvalidParameters("ball_radius must be non-negative")
    certified = True
    tail = None
    name = _method_name(law)
    if method == "empirical":
        tail = _empirical_tail(law, n, rng or np.random.default_rng(), n_walks)
        certified, name = False, "EmpiricalQuantile"
    elif method != "auto":
        raise InvalidParameters(f"unknown truncation method {method!r}")
    mass = _NeglectedMass(law, offspring_mean, n, ball_radius, tail)
    hi = 1e4 * (ball_radius + n)
    extra = (mass.u_max,) if math.isfinite(mass.u_max) else ()
    grid = _search_grid(max(1.0, math.sqrt(n)), hi, extra)
    if not mass(hi) <= eps:
        raise WindowUnbounded(
            f"no window up to L = {ball_radius + hi:g} certifies eps = {eps:g} "
            f"(step moment order {law.alpha:g} too low for d = {law.d}?)"
        )
    lo_i, hi_i = 0, len(grid) - 1
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        if mass(grid[mid]) <= eps:
            hi_i = mid
        else:
            lo_i = mid + 1
    s = grid[lo_i]
    return TruncationWindow(L=ball_radius + s, eps_trunc=float(mass(s)), method=name, certified=certified)


def _empirical_tail(law, n, rng, n_walks, chunk=20000):
    sums = np.empty(n_walks)
    for start in range(0, n_walks, chunk):
        size = min(chunk, n_walks - start)
        acc = np.zeros(size)
        for _ in range(n):
            acc += law.sample(rng, size)[:, 0]
        sums[start:start + size] = np.abs(acc)
    sums.sort()
    d = law.d

    def tail(t):
        level = t / math.sqrt(d) if d > 1 else t
        frac = 1.0 - np.searchsorted(sums, level, side="left") / n_walks
        return min(1.0, 3.0 * d * frac)

    return tail
