import json

import pytest

from jointirs.config import ConfigError, SystemConfig, config_from_dict, dbm_to_watt, load_config


def test_defaults():
    cfg = SystemConfig()
    assert cfg.num_bs_antennas == 8
    assert cfg.num_irs_elements == 200
    assert cfg.carriers_ghz == (1.95, 1.95)
    assert cfg.replace(duplex="fdd").carriers_ghz == (2.14, 1.95)


def test_dbm_to_watt():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert dbm_to_watt(17.0) == pytest.approx(0.0501187, rel=1e-5)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="irs_size"):
        config_from_dict({"irs_size": 3})


@pytest.mark.parametrize("bad", [{"duplex": "half"}, {"weighting": "maxmin"}, {"alpha": 1.5},
                                 {"num_users": 0}, {"irs_array": [0, 4]}, {"user_height": 1.0}])
def test_invalid_values_rejected(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "cfg.json"
    cfg = SystemConfig(duplex="fdd", irs_array=(8, 8))
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg


def test_load_config_missing_file_mentions_path(tmp_path):
    path = tmp_path / "absent.json"
    with pytest.raises(ConfigError, match="absent.json"):
        load_config(path)


def test_load_config_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(path)
