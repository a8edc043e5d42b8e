"""Tests for config module"""
import json
import os
import pytest


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Isolate config module from real filesystem and env"""
    config_file = str(tmp_path / 'data' / 'config.json')
    monkeypatch.setenv('GRAPHDECOMP_CONFIG', config_file)

    # Clear relevant env vars
    for key in ('LOG_LEVEL', 'EXACT_MAX_EDGES', 'CONSTRUCTIVE_FALLBACK', 'VERIFY_EXTENSIONS',
                'BATCH_WORKERS', 'DEFAULT_SEED'):
        monkeypatch.delenv(key, raising=False)

    yield tmp_path


def _write(payload):
    import config
    os.makedirs(os.path.dirname(config.config_file()), exist_ok=True)
    with open(config.config_file(), 'w') as f:
        f.write(payload)


def test_load_config_defaults():
    """load_config returns defaults when no env or file config"""
    import config
    cfg = config.load_config()
    assert cfg['LOG_LEVEL'] == 'INFO'
    assert cfg['EXACT_MAX_EDGES'] == 20
    assert cfg['CONSTRUCTIVE_FALLBACK'] is True
    assert cfg['VERIFY_EXTENSIONS'] is True
    assert cfg['BATCH_WORKERS'] == 4
    assert cfg['DEFAULT_SEED'] == 0


def test_load_config_from_env(monkeypatch):
    """load_config reads from environment variables"""
    import config
    monkeypatch.setenv('EXACT_MAX_EDGES', '12')
    monkeypatch.setenv('CONSTRUCTIVE_FALLBACK', 'false')
    monkeypatch.setenv('LOG_LEVEL', 'debug')
    cfg = config.load_config()
    assert cfg['EXACT_MAX_EDGES'] == 12
    assert cfg['CONSTRUCTIVE_FALLBACK'] is False
    assert cfg['LOG_LEVEL'] == 'DEBUG'


def test_load_config_file_overrides_env(monkeypatch):
    """File config overrides environment variables"""
    import config
    monkeypatch.setenv('EXACT_MAX_EDGES', '12')
    monkeypatch.setenv('DEFAULT_SEED', '7')
    _write(json.dumps({'EXACT_MAX_EDGES': 30}))

    cfg = config.load_config()
    assert cfg['EXACT_MAX_EDGES'] == 30
    assert cfg['DEFAULT_SEED'] == 7


def test_load_config_file_values_are_coerced():
    """String values in the config file are coerced like env values"""
    import config
    _write(json.dumps({'VERIFY_EXTENSIONS': 'no', 'BATCH_WORKERS': '0', 'DEFAULT_SEED': 'abc'}))
    cfg = config.load_config()
    assert cfg['VERIFY_EXTENSIONS'] is False
    assert cfg['BATCH_WORKERS'] == 1
    assert cfg['DEFAULT_SEED'] == 0


def test_save_and_load_config_roundtrip():
    """save_config + load_config roundtrip preserves data"""
    import config
    config.save_config({'EXACT_MAX_EDGES': 16, 'CONSTRUCTIVE_FALLBACK': False})
    cfg = config.load_config()
    assert cfg['EXACT_MAX_EDGES'] == 16
    assert cfg['CONSTRUCTIVE_FALLBACK'] is False


def test_load_config_invalid_json():
    """load_config handles corrupt config.json gracefully"""
    import config
    _write('{broken json')
    cfg = config.load_config()
    # Should return defaults without crashing
    assert cfg['EXACT_MAX_EDGES'] == 20


def test_parse_value_integers():
    """Integer settings parse strings and respect their lower bounds"""
    import config
    assert config.parse_value('EXACT_MAX_EDGES', '42') == 42
    assert config.parse_value('DEFAULT_SEED', 10) == 10
    assert config.parse_value('BATCH_WORKERS', '0') == 1
    assert config.parse_value('EXACT_MAX_EDGES', -3) == 0


def test_parse_value_booleans():
    import config
    for word in ('true', 'True', '1', 'yes', 'on', 1, True):
        assert config.parse_value('VERIFY_EXTENSIONS', word) is True
    for word in ('false', '0', 'no', 'off', 0, False):
        assert config.parse_value('VERIFY_EXTENSIONS', word) is False


@pytest.mark.parametrize('key,value', [
    ('EXACT_MAX_EDGES', 'abc'),
    ('CONSTRUCTIVE_FALLBACK', 'maybe'),
    ('NO_SUCH_SETTING', '1'),
])
def test_parse_value_rejects(key, value):
    import config
    with pytest.raises(config.ConfigError):
        config.parse_value(key, value)


def test_coerce_falls_back_to_default():
    """Unreadable or empty values give the default"""
    import config
    assert config.coerce('EXACT_MAX_EDGES', 'abc') == 20
    assert config.coerce('DEFAULT_SEED', None) == 0
    assert config.coerce('CONSTRUCTIVE_FALLBACK', '') is True
    assert config.coerce('VERIFY_EXTENSIONS', 'maybe') is True


def test_load_config_ignores_unknown_file_keys():
    import config
    _write(json.dumps({'key': 'value', 'DEFAULT_SEED': 5}))
    cfg = config.load_config()
    assert 'key' not in cfg
    assert cfg['DEFAULT_SEED'] == 5


def test_load_config_file_not_an_object():
    import config
    _write(json.dumps([1, 2, 3]))
    assert config.load_config()['EXACT_MAX_EDGES'] == 20


def test_save_config_creates_directory():
    """save_config creates the parent directory of the config file"""
    import config
    config.save_config({'DEFAULT_SEED': '3'})
    with open(config.config_file(), 'r') as f:
        loaded = json.load(f)
    assert loaded == {'DEFAULT_SEED': 3}


def test_save_config_merges_with_file():
    """Saved values are merged into what the file already holds"""
    import config
    config.save_config({'DEFAULT_SEED': 3})
    cfg = config.save_config({'VERIFY_EXTENSIONS': 'off'})
    assert cfg['DEFAULT_SEED'] == 3
    assert cfg['VERIFY_EXTENSIONS'] is False


def test_save_config_rejects_bad_values():
    """Nothing is written when a value does not parse"""
    import config
    with pytest.raises(config.ConfigError):
        config.save_config({'DEFAULT_SEED': 3, 'BATCH_WORKERS': 'many'})
    assert not os.path.exists(config.config_file())


def test_save_config_file_permissions():
    """save_config creates file with 0o600 permissions"""
    import config
    config.save_config({'LOG_LEVEL': 'debug'})
    mode = os.stat(config.config_file()).st_mode & 0o777
    assert mode == 0o600
    assert config.load_config()['LOG_LEVEL'] == 'DEBUG'
