"""In d = 3 the empty-ball probability has a non-trivial limit without rescaling.

The probability equals exp(-I_n), where I_n integrates the chance that a
single ancestor placed at x has a generation-n descendant in the unit ball.
I_n never exceeds the ball volume, because the expected number of
descendants in the ball integrates exactly to it.
"""
from emptyball import ball_volume, binary_critical, make_step, theory_band
from emptyball.pipeline import config_from_dict, estimate_hit_integral

cfg = config_from_dict({
    "offspring": {"kind": "binary"}, "step": {"component": "gaussian"},
    "experiment": {"d": 3, "n": [50], "r": [1.0], "estimator": "factorized", "budget": 300000, "seed": 5},
})
out = estimate_hit_integral(cfg, 50, 1.0)
print(f"I_50 = {out['I_hat']:.3f} +- {out['I_sigma']:.3f}   (volume bound {ball_volume(3, 1.0):.3f})")
band = theory_band(binary_critical(), make_step("gaussian", d=3), 3, 1.0)
print(f"limit band [{band.lo:.4f}, {band.hi:.4f}]")
for lo, hi, p, k in zip(out["shell_edges"][:-1], out["shell_edges"][1:], out["shell_p"], out["shell_counts"]):
    print(f"shell {lo:6.1f}-{hi:6.1f}: runs {k:7d}  hit rate {p:.2e}")
