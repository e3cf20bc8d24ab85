"""Checking the simulator against the exact lattice recursion.

With one Poisson(1) pile of ancestors per integer site, the probability
that no generation-n particle lands in B(r) is exp(-sum_x (1 - h_n(x))),
where h_n solves a short recursion. The same probability, estimated by brute
simulation, should agree within binomial error.
"""
from fractions import Fraction

from emptyball import binary_critical, dp_no_hit, enumerate_tiny, make_step, u_integral
from emptyball.oracle import exact_tail_lattice
from emptyball.pipeline import config_from_dict, estimate_direct

law, step = binary_critical(), make_step("rademacher")

# %% tiny trees by hand-free enumeration
print("P_0(hit B(0.5) at n=2) =", enumerate_tiny(law, 2, 0.5), "=", Fraction(39, 128))
print("recursion gives       =", 1 - dp_no_hit(law, 2, 0.5, step).at(0))

# %% the integral of u(n, .) shrinks with n
print([round(u_integral(law, n, 2.5, step), 4) for n in range(1, 13)])

# %% simulation versus recursion
cfg = config_from_dict({
    "offspring": {"kind": "binary"}, "step": {"component": "rademacher"},
    "experiment": {"d": 1, "n": [12], "r": [0.5], "M": 20000, "field_mode": "lattice", "scale": "raw"},
})
for e in estimate_direct(cfg, 12, [0.5, 1.5, 2.5, 3.5]):
    print(f"r={e.r}: simulated {e.p_hat:.4f} [{e.ci_lo:.4f}, {e.ci_hi:.4f}], exact {exact_tail_lattice(law, 12, e.r, step):.4f}")
