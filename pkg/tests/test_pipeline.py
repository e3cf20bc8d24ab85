import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emptyball.errors import CappedExcess, ConfigError
from emptyball.oracle import exact_tail_lattice
from emptyball.pipeline import (CSV_COLUMNS, config_from_dict, estimate_direct, estimate_factorized,
                                load_config, run_experiment, wilson_ci, write_report)
from emptyball.pipeline.experiment import read_rows, to_csv

CONFIGS = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


def cfg(offspring, step, **exp):
    exp.setdefault("seed", 11)
    return config_from_dict({"offspring": offspring, "step": step, "experiment": exp})


# ------------------------------------------------------------------ wilson ---

def test_wilson_examples():
    assert wilson_ci(0, 100)[0] == 0.0
    assert wilson_ci(100, 100)[1] == 1.0
    lo, hi = wilson_ci(50, 100)
    assert (lo + hi) / 2 == pytest.approx(0.5, abs=1e-12)
    assert hi - lo == pytest.approx(0.19, abs=0.005)
    with pytest.raises(ValueError):
        wilson_ci(5, 0)


@given(st.integers(1, 5000).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))),
       st.sampled_from([0.8, 0.9, 0.95, 0.99]))
def test_wilson_against_statsmodels(kn, conf):
    proportion = pytest.importorskip("statsmodels.stats.proportion")
    k, n = kn
    lo, hi = wilson_ci(k, n, conf)
    ref = proportion.proportion_confint(k, n, alpha=1 - conf, method="wilson")
    assert lo == pytest.approx(ref[0], abs=1e-12)
    assert hi == pytest.approx(ref[1], abs=1e-12)
    assert lo <= k / n <= hi


# ------------------------------------------------------------------ config ---

def test_shipped_configs_parse():
    for path in CONFIGS.glob("*.toml"):
        if path.name.startswith("malformed"):
            continue
        c = load_config(path)
        assert c.M >= 100 and c.eps_trunc <= 0.01


def test_malformed_config_cites_constraint():
    with pytest.raises(ConfigError, match=r"beta <= 1/d"):
        load_config(CONFIGS / "malformed_stable_d2.toml")


@pytest.mark.parametrize("exp,msg", [
    (dict(d=1, n=[10], r=[0.5], M=50), "M must be"),
    (dict(d=1, n=[10], r=[0.5], eps_trunc=0.1), "eps_trunc"),
    (dict(d=1, n=[10], r=[0.5], estimator="magic"), "estimator"),
    (dict(d=1, n=[10]), "needs both"),
    (dict(d=2, n=[10], r=[0.5]), "does not match"),
])
def test_config_validation(exp, msg):
    with pytest.raises(ConfigError, match=msg):
        config_from_dict({"offspring": {"kind": "binary"}, "step": {"component": "rademacher", "d": 1},
                          "experiment": exp})


def test_config_missing_section():
    with pytest.raises(ConfigError):
        config_from_dict({"offspring": {"kind": "binary"}})


# -------------------------------------------------------------- estimators ---

def test_direct_subcritical_example():
    c = cfg({"kind": "geometric", "m": 0.8}, {"component": "gaussian"}, d=1, n=[25], r=[0.5], M=5000)
    e = estimate_direct(c, 25, 0.5)
    lim = math.exp(-0.2)
    assert abs(e.p_hat - lim) <= max(3 * e.sigma, 0.03)
    assert e.ci_lo <= e.p_hat <= e.ci_hi and e.M_effective == 5000
    assert 0 < e.trunc_eps <= 1e-3


def test_direct_degenerate_extinct_field():
    c = cfg({"kind": "table", "probs": [1.0], "allow_degenerate": True}, {"component": "rademacher"},
            d=1, n=[5], r=[1.0], M=200, scale="raw")
    e = estimate_direct(c, 5, 1.0)
    assert e.p_hat == 1.0 and e.ci_hi == 1.0


def test_factorized_extinct_law():
    c = cfg({"kind": "table", "probs": [1.0], "allow_degenerate": True}, {"component": "gaussian"},
            d=1, n=[5], r=[1.0], scale="raw", budget=2000)
    e = estimate_factorized(c, 5, 1.0)
    assert e.I_hat == 0.0 and e.p_hat == 1.0


def test_monotone_in_r_with_common_fields():
    c = cfg({"kind": "binary"}, {"component": "rademacher"}, d=1, n=[50], r=[0.1], M=1000)
    rs = np.linspace(0.05, 1.0, 12)
    ests = estimate_direct(c, 50, rs)
    p = [e.p_hat for e in ests]
    assert all(b <= a for a, b in zip(p, p[1:]))


def test_direct_and_factorized_overlap_subcritical():
    c = load_config(CONFIGS / "thm5.toml")
    for n in c.n_list:
        d = estimate_direct(c, n, list(c.r_list))
        for e_d, r in zip(d, c.r_list):
            e_f = estimate_factorized(c, n, r, budget=200_000)
            assert e_d.ci_lo <= e_f.ci_hi and e_f.ci_lo <= e_d.ci_hi


def test_direct_and_factorized_overlap_d1_critical():
    c = load_config(CONFIGS / "thm1.toml").with_overrides(n_list=(100,))
    e_d = estimate_direct(c, 100, 0.5)
    e_f = estimate_factorized(c, 100, 0.5, budget=200_000)
    assert e_d.ci_lo <= e_f.ci_hi and e_f.ci_lo <= e_d.ci_hi


@pytest.mark.parametrize("n", [2, 6, 10, 14])
def test_lattice_simulation_matches_oracle(n):
    c = load_config(CONFIGS / "lattice.toml").with_overrides(n_list=(n,))
    for e in estimate_direct(c, n, list(c.r_list)):
        exact = exact_tail_lattice(c.law, n, e.r, c.step_law)
        assert abs(e.p_hat - exact) <= 3 * math.sqrt(exact * (1 - exact) / e.M_effective)
        assert e.band.exact == exact


def test_capped_excess_raises():
    c = cfg({"kind": "stable", "beta": 0.5, "c": 2 / 3}, {"component": "rademacher"}, d=1, n=[40], r=[0.2],
            M=100, cap=20, scale="raw")
    with pytest.raises(CappedExcess):
        estimate_direct(c, 40, 0.2)
    e = estimate_direct(c, 40, 0.2, allow_capped=True)
    assert e.capped_count > 0 and e.M_effective == 100 - e.capped_count


# -------------------------------------------------------------- experiment ---

def test_report_columns_and_dat(tmp_path):
    c = load_config(CONFIGS / "thm5.toml").with_overrides(M=500)
    rep = run_experiment(c)
    out = tmp_path / "run.csv"
    text = write_report(rep, out, "csv")
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(text.splitlines()) == 1 + len(c.r_list)
    dat = (tmp_path / "run_direct_n25.dat").read_text().splitlines()
    assert dat[0].startswith("# r p_hat") and len(dat) == 1 + len(c.r_list)
    rows = read_rows(out)
    assert [r["r"] for r in rows] == list(c.r_list)
    assert to_csv(rows) == text
    js = json.loads(write_report(rep, tmp_path / "run.json", "json"))
    assert js["rows"][0]["method"] == "direct" and set(js["checks"].values()) <= {"PASS", "FAIL", "NA"}


def test_reports_byte_identical(tmp_path):
    c = load_config(CONFIGS / "thm5.toml").with_overrides(M=300, workers=2)
    a = write_report(run_experiment(c), None)
    b = write_report(run_experiment(c), None)
    assert a == b
    # streams are keyed by task, so the worker count does not change the numbers
    assert write_report(run_experiment(c.with_overrides(workers=1)), None) == a


def test_d2_rows_are_advisory():
    c = load_config(CONFIGS / "thm2.toml").with_overrides(n_list=(20,), budget=20_000)
    rep = run_experiment(c)
    assert {e.verdict for e in rep.estimates} == {"ADVISORY"}
    assert rep.exit_status == 0


def test_stable_simulation_matches_exact_continuum_value():
    from emptyball.oracle import exact_tail_continuum
    c = load_config(CONFIGS / "thm4.toml").with_overrides(M=1000)
    n = 30
    e = estimate_direct(c, n, 0.2)
    exact = exact_tail_continuum(c.law, n, e.a_n * 0.2, c.step_law)
    assert abs(e.p_hat - exact) <= 3 * math.sqrt(exact * (1 - exact) / e.M_effective) + e.trunc_eps
