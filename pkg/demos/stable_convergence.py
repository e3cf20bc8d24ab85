"""Slow approach to the limit for stable offspring.

Offspring with generating function s + c (1 - s)^(3/2) have infinite
variance. Under the scale b_n = (n c)^2 the empty-ball probability tends to
exp(-v_1(r) 4), but the finite-n values approach it slowly.
"""
from emptyball import make_step, stable, theory_band
from emptyball.gw import scale_bn
from emptyball.oracle import exact_tail_continuum

law, step, r = stable(0.5, 2 / 3), make_step("rademacher"), 0.2
lim = theory_band(law, step, 1, r).exact
for n in (30, 60, 100, 200, 400, 800):
    p = exact_tail_continuum(law, n, r * scale_bn(law, n, 1), step)
    print(f"n={n:4d}  P = {p:.5f}  gap to limit {p - lim:+.5f}")
