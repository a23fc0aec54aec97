import math

import pytest
import yaml

from socreg.bids import check_edcr
from socreg.config import default_config_path, load_config, parse_config
from socreg.errors import BidError, ConfigError


def shipped() -> dict:
    return yaml.safe_load(default_config_path().read_text())


def test_shipped_case():
    loaded = load_config(default_config_path())
    tpl, study = loaded.template, loaded.study
    assert study.horizon == 24 and study.window == 4 and study.scenarios == 100
    assert study.shifts == (0.0, 5.0, 10.0)
    assert (study.reg_up_base, study.reg_down_base) == (25.0, 25.0)
    assert tpl.storage.initial_soc == 10.0
    assert tpl.storage.bid.soc_max == 10.5
    assert tpl.storage.bid.efficiency == 1.0
    assert math.isinf(tpl.storage.reg_up_cap)
    assert [g.reg_up_cap for g in tpl.generators] == [15.0, 40.0]
    assert study.curve.rated == 20.0 and study.sigma == 5.0
    assert not check_edcr(tpl.bids["true"])
    assert check_edcr(tpl.bids["edcr"])
    assert tpl.bids["flat"].n_segments == 1


def test_flat_rules_and_explicit_bids():
    data = shipped()
    data["storage"]["flat_bid"] = "average"
    assert parse_config(data).template.bids["flat"].n_segments == 1
    data["storage"]["flat_bid"] = {"breakpoints": [0, 10.5], "up_costs": [9],
                                   "down_costs": [9]}
    assert parse_config(data).template.bids["flat"].up_costs == (9.0,)
    data["storage"]["flat_bid"] = "median"
    with pytest.raises(ConfigError, match="unknown rule"):
        parse_config(data)


def test_invalid_true_bid_is_a_bid_error():
    data = shipped()
    data["storage"]["true_bid"]["up_costs"] = [7, 12, 18]
    with pytest.raises(BidError, match="nonincreasing"):
        parse_config(data)


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.pop("generators"), "generators"),
    (lambda d: d.pop("storage"), "storage"),
    (lambda d: d["solver"].update(pivot_rule="steepest"), "unknown options"),
    (lambda d: d["study"].update(window=99), "window"),
    (lambda d: d["network"].update(demand=[90.0] * 3), "demand covers"),
    (lambda d: d["generators"][0].update(g_max="lots"), "expected a number"),
    (lambda d: d["generators"][0].pop("name"), "name"),
])
def test_schema_errors(mutate, fragment):
    data = shipped()
    data.setdefault("solver", {})
    mutate(data)
    with pytest.raises(ConfigError, match=fragment):
        parse_config(data)


def test_solver_section_and_environment(monkeypatch):
    data = shipped()
    data["solver"] = {"node_limit": 50, "big_m": 123.0}
    loaded = parse_config(data)
    assert loaded.study.solver.node_limit == 50
    assert loaded.study.big_m == 123.0
    monkeypatch.setenv("SOCREG_NODE_LIMIT", "9")
    assert parse_config(data).study.solver.node_limit == 9


def test_infinite_values():
    data = shipped()
    data["generators"][0]["reg_up_cap"] = "inf"
    assert math.isinf(parse_config(data).template.generators[0].reg_up_cap)


def test_io_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("study: [unclosed\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_config(bad)
    top = tmp_path / "list.yaml"
    top.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(top)
