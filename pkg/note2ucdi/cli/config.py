import configparser
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from note2ucdi.damage.models import AnalysisConfig
from note2ucdi.dataprep.models import AugmentConfig, DedupConfig
from note2ucdi.exceptions import ConfigError

PathLike = Union[str, "os.PathLike[str]"]

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class CliSettings(BaseSettings):
    """Environment overrides, e.g. NOTE2UCDI_CONFIG=run.ini."""

    model_config = SettingsConfigDict(env_prefix="NOTE2UCDI_", extra="ignore")

    config: Optional[Path] = None
    log_level: str = "WARNING"
    workers: int = 1


class RunConfig(AnalysisConfig):
    dedup: DedupConfig = DedupConfig()
    augment: AugmentConfig = AugmentConfig()


def _parse_value(raw: str) -> Any:
    # "8, 8" style values feed tuple fields
    if "," in raw:
        return [part.strip() for part in raw.split(",")]
    return raw.strip()


def load_run_config(path: Optional[PathLike]) -> RunConfig:
    """Defaults overlaid with an INI file of [section] key = value pairs."""
    if path is None:
        return RunConfig()

    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except (OSError, configparser.Error) as e:
        raise ConfigError(f"cannot read config file {path}: {e}")

    known = set(RunConfig.model_fields)
    sections: Dict[str, Dict[str, Any]] = {}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}] in {path}")
        sections[section] = {k: _parse_value(v) for k, v in parser.items(section)}

    try:
        return RunConfig.model_validate(sections)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration in {path}: {e}")


def with_overrides(config: RunConfig, section: str, **values: Any) -> RunConfig:
    """Apply command-line flags to one section; None means "not given"."""
    given = {k: v for k, v in values.items() if v is not None}
    if not given:
        return config
    current = getattr(config, section)
    try:
        updated = type(current).model_validate({**current.model_dump(), **given})
    except ValidationError as e:
        raise ConfigError(f"invalid {section} option: {e}")
    return config.model_copy(update={section: updated})


def resolve_workers(flag: Optional[int], section: BaseModel, settings: CliSettings) -> int:
    """--workers flag, then a workers key in the config file, then NOTE2UCDI_WORKERS."""
    if flag is not None:
        return flag
    if "workers" in section.model_fields_set:
        return section.workers
    return settings.workers


def configure_logging(level: str) -> None:
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level {level}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)
