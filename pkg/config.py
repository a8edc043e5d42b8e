import json
import logging
import os
from typing import Any

from dotenv import load_dotenv

import graph_io

load_dotenv('.env')
load_dotenv('.env.local', override=True)

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = 'data/config.json'

DEFAULTS: dict[str, Any] = {
    'LOG_LEVEL': 'INFO',
    'EXACT_MAX_EDGES': 20,
    'CONSTRUCTIVE_FALLBACK': True,
    'VERIFY_EXTENSIONS': True,
    'BATCH_WORKERS': 4,
    'DEFAULT_SEED': 0,
}

# lower bounds for integer settings
MINIMUMS = {'EXACT_MAX_EDGES': 0, 'BATCH_WORKERS': 1}

TRUE_WORDS = frozenset({'true', '1', 'yes', 'on'})
FALSE_WORDS = frozenset({'false', '0', 'no', 'off'})


class ConfigError(ValueError):
    """Raised when a setting name is unknown or a value cannot be read as its type"""


def config_file() -> str:
    return os.getenv('GRAPHDECOMP_CONFIG', DEFAULT_CONFIG_FILE)


def parse_value(key: str, value: Any) -> Any:
    """Read value as the type of key's default.

    Raises:
        ConfigError: if key is unknown or value does not fit its type
    """
    if key not in DEFAULTS:
        raise ConfigError(f'Unknown setting {key!r}; known: {", ".join(DEFAULTS)}')
    default = DEFAULTS[key]
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, int):
            return value != 0
        word = str(value).strip().lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
        raise ConfigError(f'{key} expects a boolean, got {value!r}')
    if isinstance(default, int):
        try:
            number = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f'{key} expects an integer, got {value!r}') from None
        return max(MINIMUMS.get(key, number), number)
    return str(value).strip().upper()


def coerce(key: str, value: Any) -> Any:
    """parse_value, falling back to the default for missing or unreadable values"""
    if value is None or value == '':
        return DEFAULTS[key]
    try:
        return parse_value(key, value)
    except ConfigError as e:
        logger.warning('%s; using %r', e, DEFAULTS[key])
        return DEFAULTS[key]


def read_config_file() -> dict[str, Any]:
    """Raw settings stored in the config file; {} when it is missing or unreadable"""
    path = config_file()
    if not os.path.exists(path):
        return {}
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (json.JSONDecodeError, OSError) as e:
        logger.error('Failed to load config file: %s', e)
        return {}
    if not isinstance(data, dict):
        logger.error('Config file %s does not hold a JSON object', path)
        return {}
    return data


def load_config() -> dict[str, Any]:
    """Settings from the environment, overlaid by the config file if present"""
    raw: dict[str, Any] = {key: os.getenv(key) for key in DEFAULTS}
    for key, value in read_config_file().items():
        if key in DEFAULTS:
            raw[key] = value
        else:
            logger.warning('Ignoring unknown setting %r in %s', key, config_file())
    return {key: coerce(key, value) for key, value in raw.items()}


def save_config(changes: dict[str, Any]) -> dict[str, Any]:
    """Merge changes into the config file (atomic, 0o600) and return the effective settings.

    Raises:
        ConfigError: if a name is unknown or a value does not fit its type
    """
    parsed = {key: parse_value(key, value) for key, value in changes.items()}
    path = config_file()
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    graph_io.write_json(path, {**read_config_file(), **parsed})
    logger.info('Saved %s to %s', ', '.join(sorted(parsed)), path)
    return load_config()
