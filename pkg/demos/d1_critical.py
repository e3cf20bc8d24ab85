"""Empty ball around the origin for critical binary branching on Z.

Start a Poisson field of ancestors on the line, let each particle split into
0 or 2 children with equal probability and move by +-1. The distance R_n to
the nearest generation-n particle grows linearly, and P(R_n / n >= r)
settles at exp(-4 r / sigma^2).
"""
import math

import numpy as np

from emptyball import binary_critical, exact_tail_continuum, make_step, theory_band
from emptyball.pipeline import config_from_dict, estimate_direct

law = binary_critical()
step = make_step("rademacher")

# %% limit and exact finite-n values
r = 0.5
print("limit:", theory_band(law, step, 1, r).exact)
for n in (25, 50, 100, 200, 400):
    print(f"n={n:4d}  exact P(R_n >= {r} n) = {exact_tail_continuum(law, n, r * n, step):.5f}")

# %% Monte Carlo on a window of the field, reusing the same fields across radii
cfg = config_from_dict({
    "offspring": {"kind": "binary"},
    "step": {"component": "rademacher"},
    "experiment": {"d": 1, "n": [100], "r": [0.5], "M": 1000, "seed": 1},
})
rs = np.linspace(0.1, 1.2, 12)
for e in estimate_direct(cfg, 100, rs):
    exact = exact_tail_continuum(law, 100, e.r * 100, step)
    print(f"r={e.r:.2f}  p_hat={e.p_hat:.4f}  [{e.ci_lo:.4f}, {e.ci_hi:.4f}]  exact={exact:.4f}  "
          f"limit={math.exp(-4 * e.r):.4f}")
