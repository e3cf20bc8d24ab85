import math

import numpy as np
import pytest
from scipy.special import gamma

from emptyball.errors import RegimeError
from emptyball.limits import ball_volume, cd_r, theory_band
from emptyball.offspring import binary_critical, geometric, stable, table
from emptyball.steps import make_step


def test_ball_volume_examples():
    assert ball_volume(1, 3.0) == pytest.approx(6.0)
    assert ball_volume(2, 1.0) == pytest.approx(math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(32 * math.pi / 3)


@pytest.mark.parametrize("d", range(2, 11))
def test_ball_volume_recursion(d):
    r = 1.7
    rec = ball_volume(d - 1, r) * r * math.sqrt(math.pi) * gamma((d + 1) / 2) / gamma(d / 2 + 1)
    assert ball_volume(d, r) == pytest.approx(rec, rel=1e-12)


def test_cd_r_examples():
    assert cd_r(make_step("rademacher", d=3), 3, 6.0) == pytest.approx(17.0)
    bracket = 1 + 12 * math.sqrt(2 / math.pi)
    assert cd_r(make_step("gaussian", d=3), 3, 1.0) == pytest.approx(2 * bracket**3 + 1, rel=1e-12)
    assert cd_r(make_step("gaussian", d=3), 3, 1.0) == pytest.approx(2365.96, rel=1e-5)
    assert cd_r(make_step("gaussian", d=3), 3, 1e9) == pytest.approx(3.0, rel=1e-6)
    with pytest.raises(RegimeError):
        cd_r(make_step("gaussian", d=2), 2, 1.0)


def test_band_examples():
    b = theory_band(binary_critical(), make_step("rademacher"), 1, 0.5)
    assert b.exact == pytest.approx(0.135335, abs=1e-6) and b.lo == b.hi == b.exact
    b = theory_band(stable(0.5, 2 / 3), make_step("rademacher"), 1, 0.2)
    assert b.exact == pytest.approx(math.exp(-1.6)) and b.exact == pytest.approx(0.201897, abs=1e-6)
    b = theory_band(geometric(0.8), make_step("gaussian"), 1, 0.5)
    assert b.exact == pytest.approx(0.818731, abs=1e-6)


def test_band_d2_is_advisory():
    b = theory_band(binary_critical(), make_step("gaussian", d=2), 2, 2.0)
    assert (b.lo, b.hi, b.exact, b.rigorous) == (0.0, 1.0, None, False)
    base = 8 * math.pi
    assert b.advisory_lo == pytest.approx(math.exp(-2 * base))
    assert b.advisory_hi == pytest.approx(math.exp(-base / 2))
    assert "non-rigorous" in b.description


def test_band_d3():
    step = make_step("gaussian", d=3)
    b = theory_band(binary_critical(), step, 3, 1.0)
    v = 4 * math.pi / 3
    assert b.lo == pytest.approx(math.exp(-v))
    assert b.hi == pytest.approx(math.exp(-v / (1 + cd_r(step, 3, 1.0))))
    for r in np.geomspace(0.05, 50, 30):
        b = theory_band(binary_critical(), step, 3, r)
        assert b.lo < b.hi
    # the upper exponent approaches v_d(r) / (1 + 3 r^2) since C_d(r) -> 3
    ratios = [(1 + cd_r(step, 3, r) * r * r) / (1 + 3 * r * r) for r in (10.0, 1e3, 1e5)]
    assert ratios[0] > ratios[1] > ratios[2] and ratios[2] == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("law,d,step", [
    (binary_critical(), 1, make_step("rademacher")),
    (table([0.3, 0.45, 0.2, 0.05]), 1, make_step("gaussian")),
    (stable(0.5, 2 / 3), 1, make_step("rademacher")),
    (stable(0.5, 0.5), 2, make_step("gaussian", d=2)),
    (geometric(0.8), 1, make_step("gaussian")),
    (geometric(0.5), 3, make_step("gaussian", d=3)),
])
def test_exact_values_decrease_in_r(law, d, step):
    vals = [theory_band(law, step, d, r).exact for r in np.linspace(0.05, 3, 40)]
    assert all(0 < v < 1 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_band_regime_errors():
    with pytest.raises(RegimeError):
        theory_band(stable(0.7, 0.5), make_step("gaussian", d=2), 2, 1.0)
    with pytest.raises(ValueError):
        theory_band(binary_critical(), make_step("rademacher"), 1, 0.0)
