import pytest

from smartran.config import ConfigError, ScenarioConfig, load_config, profile_config


def test_empty_file_gives_paper_defaults(tmp_path):
    path = tmp_path / "empty.ini"
    path.write_text("")
    cfg = load_config(path)
    assert cfg == ScenarioConfig()
    assert (cfg.num_rrs, cfg.num_subcarriers, cfg.max_power_dbm, cfg.noise_psd_dbm_hz) == (4, 32, 40.0, -174.0)
    assert (cfg.b_csi, cfg.b_sc, cfg.b_pw) == (16, 4, 4)
    assert (cfg.area_radius, cfg.cell_radius) == (500.0, 100.0)


def test_unknown_key_named(tmp_path):
    path = tmp_path / "typo.ini"
    path.write_text("[radio]\npowr_dbm = 30\n")
    with pytest.raises(ConfigError, match="powr_dbm"):
        load_config(path)


def test_unknown_section(tmp_path):
    path = tmp_path / "s.ini"
    path.write_text("[misc]\nx = 1\n")
    with pytest.raises(ConfigError, match="misc"):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.ini")


def test_values_parsed(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[users]\nsweep = 8, 16, 32\n[rl]\nhidden = 64 64\nrap_learner = ddpg\n"
                    "[toc]\nmonitoring = no\nw_complexity = 0.5\n[run]\nmode = smart\n")
    cfg = load_config(path)
    assert cfg.sweep == (8, 16, 32) and cfg.hidden == (64, 64)
    assert cfg.rap_learner == "ddpg" and cfg.monitoring is False and cfg.w_complexity == 0.5
    assert cfg.modes() == ("smart",)


@pytest.mark.parametrize("body, match", [
    ("[users]\nsweep = 16, 8\n", "strictly increasing"),
    ("[radio]\nnum_subcarriers = 0\n", "num_subcarriers"),
    ("[geometry]\ncell_radius = 900\n", "cell_radius"),
    ("[rl]\ngamma = 1.0\n", "gamma"),
    ("[run]\nmode = semi\n", "mode"),
    ("[radio]\nbandwidth_hz = wide\n", "bandwidth_hz"),
    ("[toc]\nmonitoring = maybe\n", "monitoring"),
])
def test_invalid_values_rejected(tmp_path, body, match):
    path = tmp_path / "bad.ini"
    path.write_text(body)
    with pytest.raises(ConfigError, match=match):
        load_config(path)


def test_profiles_and_overrides():
    fast = profile_config("fast")
    assert fast.num_subcarriers == 16 and fast.sweep == (8, 16, 32, 64, 96)
    assert load_config(profile="fast", seed=9).seed == 9
    assert load_config(profile="fast", seed=None).seed == 0
    with pytest.raises(ConfigError):
        profile_config("huge")
    assert ScenarioConfig().modes() == ("centralized", "distributed", "smart")
