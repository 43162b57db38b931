import logging

import pytest

from note2ucdi.cli.config import (
    CliSettings,
    RunConfig,
    configure_logging,
    load_run_config,
    resolve_workers,
    with_overrides,
)
from note2ucdi.exceptions import ConfigError

RUN_INI = """
[enhance]
clahe_tiles = 4, 4
median_enabled = false

[dedup]
threshold = 3

[ucdi]
weights = 0.5, 0.2, 0.1, 0.1, 0.05, 0.05
z_max = 10

[align]
seed = 7
"""


def write_ini(tmp_path, text: str):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return path


def test_defaults():
    config = load_run_config(None)
    assert config == RunConfig()
    assert config.dedup.threshold == 5
    assert config.ucdi.weights == (0.4, 0.2, 0.15, 0.15, 0.05, 0.05)


def test_ini_sections(tmp_path):
    config = load_run_config(write_ini(tmp_path, RUN_INI))
    assert config.enhance.clahe_tiles == (4, 4)
    assert config.enhance.median_enabled is False
    assert config.dedup.threshold == 3
    assert config.ucdi.weights == (0.5, 0.2, 0.1, 0.1, 0.05, 0.05)
    assert config.ucdi.z_max == 10
    assert config.align.seed == 7
    assert config.damage.dbscan_eps == 0.02


@pytest.mark.parametrize(
    "text",
    [
        "[colour]\nhue = 1\n",
        "[dedup]\nthreshold = 99\n",
        "[dedup]\nthreshhold = 3\n",
        "[ucdi]\nweights = 1, 2\n",
        "not an ini file",
    ],
)
def test_bad_config_files(tmp_path, text):
    with pytest.raises(ConfigError):
        load_run_config(write_ini(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.ini")


def test_overrides_skip_unset_flags():
    config = RunConfig()
    assert with_overrides(config, "dedup", threshold=None) is config
    updated = with_overrides(config, "dedup", threshold=2, workers=None)
    assert updated.dedup.threshold == 2
    assert updated.dedup.workers == 1


def test_overrides_are_validated():
    with pytest.raises(ConfigError):
        with_overrides(RunConfig(), "dedup", threshold=-1)


def test_settings_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("NOTE2UCDI_WORKERS", "3")
    monkeypatch.setenv("NOTE2UCDI_CONFIG", str(tmp_path / "x.ini"))
    settings = CliSettings()
    assert settings.workers == 3
    assert settings.config == tmp_path / "x.ini"
    assert settings.log_level == "WARNING"


def test_workers_flag_beats_config_file_beats_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("NOTE2UCDI_WORKERS", "3")
    settings = CliSettings()
    from_file = load_run_config(write_ini(tmp_path, "[dedup]\nworkers = 2\n"))
    assert resolve_workers(5, from_file.dedup, settings) == 5
    assert resolve_workers(None, from_file.dedup, settings) == 2
    assert resolve_workers(None, load_run_config(None).dedup, settings) == 3
    silent = load_run_config(write_ini(tmp_path, "[dedup]\nthreshold = 4\n"))
    assert resolve_workers(None, silent.dedup, settings) == 3


def test_configure_logging():
    configure_logging("debug")
    assert logging.getLogger().level == logging.DEBUG
    configure_logging("WARNING")
    with pytest.raises(ConfigError):
        configure_logging("chatty")
