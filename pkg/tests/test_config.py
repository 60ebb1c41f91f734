import pytest

from timelens.config import ConfigError, parse_config_text

import oracles

GOOD = """
[input]
signal_center = 811.006 nm
signal_bandwidth = 1.840 THz
herald_center = 740.194 nm
herald_bandwidth = 2.034 THz
correlation = -0.9776

[escort]
center = 774.6 nm
bandwidth = 2.766 THz
chirp = -344e3 fs^2

[lens]
signal_chirp = 696e3 fs^2
output_chirp = solve

[phasematching]
sigma = infinite

[delay]
tau = 0.5 ps
sweep_start = -2 ps
sweep_stop = 2 ps
sweep_points = 5

[grid]
n = 256
span = 6

[analysis]
resolution_signal = 0.136 nm
resolution_herald = 0.148 nm
trials = 100
seed = 7
"""


def test_parse_good_config():
    cfg = parse_config_text(GOOD)
    assert cfg.state.omega1 == pytest.approx(oracles.OMEGA1, rel=1e-12)
    assert cfg.state.sigma1 == pytest.approx(4.909e12, rel=1e-3)
    assert cfg.state.sigmah == pytest.approx(5.427e12, rel=1e-3)
    assert cfg.state.rho == -0.9776
    assert cfg.lens.signal_chirp == pytest.approx(6.96e-25, rel=1e-12)
    assert cfg.lens.escort.chirp == pytest.approx(-3.44e-25, rel=1e-12)
    assert cfg.lens.escort.sigma == pytest.approx(7.380e12, rel=1e-3)
    assert cfg.lens.output_chirp == pytest.approx(6.8018e-25, rel=1e-4)
    assert cfg.lens.phasematching.is_infinite
    assert cfg.tau == pytest.approx(0.5e-12)
    assert cfg.sweep == (pytest.approx(-2e-12), pytest.approx(2e-12), 5)
    assert cfg.grid.n == 256
    assert cfg.analysis.resolution_signal_nm == pytest.approx(0.136)
    assert cfg.analysis.trials == 100


def test_sigma_keys_instead_of_bandwidth():
    text = GOOD.replace("bandwidth = 2.766 THz", "sigma = 7.38e12 rad/s")
    cfg = parse_config_text(text)
    assert cfg.lens.escort.sigma == 7.38e12


def test_missing_unit_names_key():
    text = GOOD.replace("chirp = -344e3 fs^2", "chirp = -344e3")
    with pytest.raises(ConfigError, match=r"\[escort\] chirp"):
        parse_config_text(text)


def test_unknown_unit_rejected():
    text = GOOD.replace("signal_chirp = 696e3 fs^2", "signal_chirp = 696e3 furlongs")
    with pytest.raises(ConfigError, match="signal_chirp"):
        parse_config_text(text)


def test_unknown_key_rejected():
    text = GOOD.replace("n = 256", "n = 256\nmystery = 1")
    with pytest.raises(ConfigError, match="mystery"):
        parse_config_text(text)


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="detector"):
        parse_config_text(GOOD + "\n[detector]\nefficiency = 0.5\n")


def test_missing_required_section():
    text = GOOD.replace("[escort]", "[_escort_disabled]", 1)
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_missing_required_key():
    text = GOOD.replace("correlation = -0.9776\n", "")
    with pytest.raises(ConfigError, match="correlation"):
        parse_config_text(text)


def test_both_width_forms_rejected():
    text = GOOD.replace(
        "signal_bandwidth = 1.840 THz",
        "signal_bandwidth = 1.840 THz\nsignal_sigma = 4.9e12 rad/s",
    )
    with pytest.raises(ConfigError, match="not both"):
        parse_config_text(text)


def test_dimensionless_with_unit_rejected():
    text = GOOD.replace("correlation = -0.9776", "correlation = -0.9776 nm")
    with pytest.raises(ConfigError, match="correlation"):
        parse_config_text(text)


def test_invalid_rho_rejected():
    text = GOOD.replace("correlation = -0.9776", "correlation = -1.5")
    with pytest.raises(ConfigError, match="input"):
        parse_config_text(text)


def test_incomplete_sweep_rejected():
    text = GOOD.replace("sweep_points = 5\n", "")
    with pytest.raises(ConfigError, match="sweep"):
        parse_config_text(text)


def test_auto_grid():
    text = GOOD.replace("n = 256", "n = auto")
    assert parse_config_text(text).grid.n is None


def test_phasematching_finite():
    text = GOOD.replace("sigma = infinite", "sigma = 9.1e12 rad/s")
    cfg = parse_config_text(text)
    assert cfg.lens.phasematching.sigma == 9.1e12


def test_bundled_configs_parse():
    from importlib import resources

    for name in ("experimental.cfg", "ideal.cfg", "filterlimit.cfg", "longcrystal.cfg"):
        text = (resources.files("timelens") / "configs" / name).read_text()
        cfg = parse_config_text(text)
        assert cfg.state.sigma1 > 0
