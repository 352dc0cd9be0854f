import pytest

from privmarket import ScenarioError, SweepSpec, load_scenario, sweep_values
from privmarket.errors import DomainError

GOOD = """\
[market]
M = 1000

[service.S1]
N = 100
c = 0.2
alpha1 = 0.822
alpha2 = 0.004
alpha3 = 2.813

[service.S3]
N = 100
c = 0.1
alpha1 = 0.867
alpha2 = 0.001
alpha3 = 4.2

[bundle]
members = S1, S3
gamma = 0.1
kind = complement

[sim]
draws = 5000
seed = 21
sigma_z = 0.5
"""


def _write(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_full_scenario_loads(tmp_path):
    loaded = load_scenario(_write(tmp_path, GOOD))
    assert loaded.market.m == 1000
    assert set(loaded.services) == {"S1", "S3"}
    assert loaded.services["S1"].c == 0.2
    assert loaded.bundle is not None
    assert loaded.bundle.kind == "complement"
    assert loaded.bundle_members == ("S1", "S3")
    assert loaded.sim.draws == 5000
    assert loaded.sim.seed == 21
    assert loaded.sim.sigma_z == 0.5


def test_sim_defaults(tmp_path):
    text = GOOD.split("[sim]")[0]
    loaded = load_scenario(_write(tmp_path, text))
    assert loaded.sim.draws == 100_000
    assert loaded.sim.seed == 0
    assert loaded.sim.sigma_z == 1.0


def test_unknown_key_rejected_with_location(tmp_path):
    text = GOOD.replace("c = 0.2", "c = 0.2\nwage = 3")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "wage" in str(err.value)
    assert "line 7" in str(err.value)
    assert "service.S1" in str(err.value)


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, GOOD + "\n[pricing]\nx = 1\n"))
    assert "pricing" in str(err.value)


def test_negative_wage_names_key(tmp_path):
    text = GOOD.replace("c = 0.2", "c = -0.2")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "'c'" in str(err.value)


def test_alphas_and_samples_conflict(tmp_path):
    text = GOOD.replace("alpha1 = 0.822", "alpha1 = 0.822\nsamples = q.csv")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "not both" in str(err.value)


def test_samples_path_resolves_and_fits(tmp_path):
    import numpy as np

    from privmarket import evaluate_quality
    from conftest import S1_PARAMS

    rows = ["r,quality"] + [
        f"{r},{evaluate_quality(float(r), S1_PARAMS)}" for r in np.linspace(0, 1, 11)
    ]
    (tmp_path / "s1.csv").write_text("\n".join(rows) + "\n")
    text = GOOD.replace(
        "alpha1 = 0.822\nalpha2 = 0.004\nalpha3 = 2.813", "samples = s1.csv"
    )
    loaded = load_scenario(_write(tmp_path, text))
    assert "S1" in loaded.fits
    assert loaded.services["S1"].quality.alpha1 == pytest.approx(0.822, abs=1e-6)


def test_bundle_member_must_exist(tmp_path):
    text = GOOD.replace("members = S1, S3", "members = S1, S9")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "S9" in str(err.value)


def test_bundle_kind_gamma_mismatch(tmp_path):
    text = GOOD.replace("gamma = 0.1", "gamma = -0.1")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "contingency" in str(err.value)


def test_mismatched_crowd_sizes_rejected(tmp_path):
    text = GOOD.replace("N = 100\nc = 0.1", "N = 50\nc = 0.1")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "crowd size" in str(err.value)


def test_duplicate_key_rejected(tmp_path):
    text = GOOD.replace("M = 1000", "M = 1000\nM = 500")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "duplicate" in str(err.value)


def test_garbled_line_reports_number(tmp_path):
    text = GOOD.replace("M = 1000", "M 1000")
    with pytest.raises(ScenarioError) as err:
        load_scenario(_write(tmp_path, text))
    assert "line 2" in str(err.value)


def test_sweep_spec_validation():
    SweepSpec(param="service.S1.c", start=0.0, stop=1.0, steps=2)
    with pytest.raises(DomainError):
        SweepSpec(param="service.S1.c", start=0.0, stop=1.0, steps=1)
    with pytest.raises(DomainError):
        SweepSpec(param="service.S1.c", start=1.0, stop=0.0, steps=5)


def test_sweep_values_inclusive():
    values = sweep_values(SweepSpec(param="bundle.gamma", start=0.0, stop=0.5, steps=6))
    assert values == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
