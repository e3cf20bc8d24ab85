"""Empty-ball radius of a branching random walk started from a Poisson field.

R_n is the distance from the origin to the nearest generation-n particle.
The package simulates R_n, computes exact lattice values, and evaluates the
limits of P(R_n / a_n >= r) in the critical, stable and subcritical regimes.
"""
from .engine import propagate, sample_field, simulate_generations, simulate_rn, hits_ball
from .gw import q_function_at_zero, scale_policy, survival_at, survival_constant, survival_sequence
from .limits import TheoryBand, ball_volume, cd_r, theory_band
from .offspring import OffspringLaw, Regime, binary_critical, geometric, make_offspring, stable, table
from .oracle import dp_no_hit, enumerate_tiny, exact_tail_continuum, exact_tail_lattice, u_integral
from .steps import StepLaw, TruncationWindow, make_step, tail_bound, truncation_radius

__version__ = "0.1.0"
