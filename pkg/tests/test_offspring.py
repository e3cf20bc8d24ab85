import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emptyball.errors import DomainError, InvalidParameters
from emptyball.offspring import (Regime, binary_critical, geometric, make_offspring, mean_var, pgf,
                                 sample_count, stable, table)

LAWS = [binary_critical(), geometric(0.8), geometric(0.5), stable(0.5, 2 / 3), stable(1.0, 0.4),
        table([0.6, 0.2, 0.2]), table([0.35, 0.4, 0.15, 0.1])]


def test_binary_atoms():
    law = make_offspring("binary")
    assert law.pmf(2).tolist() == [0.5, 0.0, 0.5]
    assert mean_var(law) == (1.0, 1.0)
    assert law.regime is Regime.CRITICAL_FINITE_VAR


def test_stable_first_coefficients():
    p = make_offspring("stable", beta=0.5, c=2 / 3).pmf(2)
    np.testing.assert_allclose(p, [2 / 3, 0.0, 0.25], atol=1e-15)


def test_stable_pmf_matches_taylor_series():
    # coefficients of s + c(1-s)^(1+beta) from the generalized binomial series
    beta, c = 0.5, 2 / 3
    p = stable(beta, c).pmf(30)
    for k in range(2, 31):
        coef = c * (-1) ** k * math.gamma(2 + beta) / (math.gamma(k + 1) * math.gamma(2 + beta - k))
        assert p[k] == pytest.approx(coef, rel=1e-10)


def test_stable_mass_and_tail_remainder():
    law = stable(0.5, 2 / 3)
    p = law.pmf(10**6)
    assert np.all(p >= 0)
    assert 1.0 - math.fsum(p) == pytest.approx(law.stable_tail_remainder(10**6), rel=1e-2)
    assert 1.0 - math.fsum(p) < 1e-9


def test_geometric_parameterization():
    law = geometric(0.8)
    q = 4 / 9
    k = np.arange(50)
    np.testing.assert_allclose(law.pmf(49), (1 - q) * q**k, rtol=1e-13)
    s = np.linspace(0, 1, 11)
    np.testing.assert_allclose(law.pgf(s), (1 - q) / (1 - q * s), rtol=1e-14)
    m, v = mean_var(law)
    assert m == pytest.approx(0.8)
    assert v == pytest.approx(1.44)
    # series cross-check of the variance
    kk = np.arange(2000)
    pk = (1 - q) * q**kk
    assert math.fsum(kk**2 * pk) - math.fsum(kk * pk) ** 2 == pytest.approx(1.44, rel=1e-12)


def test_stable_moments():
    m, v = mean_var(stable(0.5, 2 / 3))
    assert m == 1.0 and math.isinf(v)


@pytest.mark.parametrize("bad", [
    dict(kind="stable", beta=0.5, c=0.9),
    dict(kind="stable", beta=1.2, c=0.1),
    dict(kind="stable", beta=0.0, c=0.1),
    dict(kind="geometric", m=1.2),
    dict(kind="table", probs=[0.5, -0.1, 0.6]),
    dict(kind="table", probs=[0.5, 0.4]),
    dict(kind="table", probs=[1.0]),
    dict(kind="table", probs=[0.0, 1.0]),
    dict(kind="nonsense"),
])
def test_invalid_parameters(bad):
    kind = bad.pop("kind")
    with pytest.raises(InvalidParameters):
        make_offspring(kind, **bad)


def test_pgf_examples():
    assert pgf(binary_critical(), 0.0) == 0.5
    for law in LAWS:
        assert pgf(law, 1.0) == pytest.approx(1.0, abs=1e-12)
    law = stable(0.5, 2 / 3)
    assert pgf(law, 0.75) == pytest.approx(0.75 + (2 / 3) * 0.25**1.5, rel=1e-14)
    series = math.fsum(law.pmf(10**6) * 0.75 ** np.arange(10**6 + 1))
    assert series == pytest.approx(pgf(law, 0.75), abs=1e-12)
    with pytest.raises(DomainError):
        pgf(law, 1.5)
    with pytest.raises(DomainError):
        pgf(law, -0.1)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.kind)
def test_pgf_monotone_convex_above_diagonal(law):
    s = np.linspace(0, 1, 1000)
    f = law.pgf(s)
    assert np.all(np.diff(f) >= -1e-15)
    assert np.all(np.diff(f, 2) >= -1e-12)
    assert np.all(f >= s - 1e-15)


@pytest.mark.parametrize("law", [l for l in LAWS if math.isfinite(l.var_sigma2)], ids=lambda l: l.kind)
def test_pgf_slope_at_one_is_mean(law):
    h = 1e-6
    slope = (law.pgf(1.0) - law.pgf(1.0 - h)) / h
    assert slope == pytest.approx(law.mean_m, abs=1e-4)


@given(q=st.floats(0.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_complement_form_matches_pgf(q):
    for law in LAWS:
        direct = 1.0 - float(law.pgf(1.0 - q))
        assert law.one_minus_pgf_of_one_minus(q) == pytest.approx(direct, abs=1e-12)


def test_sample_binary_mean(rng):
    x = binary_critical().sample_counts(rng, 10**6)
    assert abs(x.mean() - 1.0) <= 4e-3


def test_sample_geometric_p0(rng):
    x = geometric(0.8).sample_counts(rng, 10**6)
    p0 = 5 / 9
    assert abs(np.mean(x == 0) - p0) <= 3 * math.sqrt(p0 * (1 - p0) / 1e6)


def test_sample_stable_tail_frequency(rng):
    law = stable(0.5, 2 / 3)
    x = law.sample_counts(rng, 10**6)
    tail = 1.0 - math.fsum(law.pmf(99))
    sd = math.sqrt(tail * (1 - tail) / 1e6)
    assert abs(np.mean(x >= 100) - tail) <= 3 * sd


def test_stable_sampler_beyond_table(rng):
    # a small table forces the power-tail sampler to carry the mass above k_max
    law = stable(0.5, 2 / 3, k_max=1000)
    x = law.sample_counts(rng, 10**6)
    tail = law.stable_tail_remainder(1000)
    sd = math.sqrt(tail * (1 - tail) / 1e6)
    assert abs(np.mean(x > 1000) - tail) <= 3 * sd
    assert x.max() > 1000


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.kind)
def test_sample_total_variation(law, rng):
    x = law.sample_counts(rng, 10**6)
    K = 200
    emp = np.bincount(np.minimum(x, K + 1), minlength=K + 2) / len(x)
    p = law.pmf(K)
    exact = np.append(p, max(0.0, 1.0 - p.sum()))
    assert 0.5 * np.abs(emp - exact).sum() < 5e-3


def test_sample_count_scalar(rng):
    k = sample_count(binary_critical(), rng)
    assert k in (0, 2)


def test_degenerate_table_opt_in():
    law = table([1.0], allow_degenerate=True)
    assert law.pgf(0.3) == 1.0
    law = table([0.0, 1.0], allow_degenerate=True)
    assert law.pgf(0.3) == pytest.approx(0.3)


def test_stable_beta_one_has_finite_variance():
    law = stable(1.0, 0.4)
    assert law.var_sigma2 == pytest.approx(0.8)
    assert law.pmf(2).tolist() == pytest.approx([0.4, 0.2, 0.4])
