"""
Tests for the YAML configuration layer.
"""

import pytest
import yaml

from config_loader import CONFIG_ENV_VAR, Config

MINIMAL = {
    'numerics': {'seed': 3, 'grid': 50, 'samples': 100, 'tolerance': 1e-10},
    'paths': {'rings': 'my_rings'},
}


def write(tmp_path, data, name='toolkit.yaml'):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data), encoding='utf-8')
    return path


class TestConfig:

    def test_shipped_defaults(self, config):
        assert config.seed == 0
        assert config.grid == 200
        assert config.samples == 10000
        assert config.tolerance == 1e-12
        assert config.composite_tolerance == 1e-9
        assert config.isotopy_eps == 0.1
        assert config.e8_survives is True
        assert config.output_format == 'text'

    def test_shipped_paths_exist(self, config):
        assert config.rings_dir.is_dir()
        assert config.expectations_file.is_file()
        assert config.schema_file.is_file()

    def test_optional_fields_default(self, tmp_path):
        cfg = Config(write(tmp_path, MINIMAL))
        assert cfg.composite_tolerance == 1e-9
        assert cfg.isotopy_eps == 0.1
        assert cfg.e8_survives is True
        assert cfg.output_format == 'text'

    def test_relative_paths_resolve_against_config(self, tmp_path):
        cfg = Config(write(tmp_path, MINIMAL))
        assert cfg.rings_dir == tmp_path / 'my_rings'
        assert cfg.expectations_file == tmp_path / 'expectations' / 'reference_values.yaml'

    def test_dot_get(self, tmp_path):
        cfg = Config(write(tmp_path, MINIMAL))
        assert cfg.get('numerics.seed') == 3
        assert cfg.get('numerics.missing', 'x') == 'x'
        assert cfg.get('numerics.seed.deeper') is None

    def test_defaults_echo(self, tmp_path):
        cfg = Config(write(tmp_path, MINIMAL))
        assert cfg.defaults()['grid'] == 50

    def test_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv(CONFIG_ENV_VAR, str(write(tmp_path, MINIMAL, 'other.yaml')))
        assert Config().seed == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            Config(tmp_path / 'nope.yaml')

    def test_missing_section(self, tmp_path):
        with pytest.raises(ValueError, match='paths'):
            Config(write(tmp_path, {'numerics': MINIMAL['numerics']}))

    def test_missing_numerics_field(self, tmp_path):
        data = {'numerics': {'seed': 0, 'grid': 10, 'samples': 5}, 'paths': {}}
        with pytest.raises(ValueError, match='tolerance'):
            Config(write(tmp_path, data))

    def test_grid_bound(self, tmp_path):
        data = {'numerics': dict(MINIMAL['numerics'], grid=1), 'paths': {}}
        with pytest.raises(ValueError):
            Config(write(tmp_path, data))

    def test_bad_output_format(self, tmp_path):
        cfg = Config(write(tmp_path, dict(MINIMAL, output={'format': 'xml'})))
        with pytest.raises(ValueError):
            cfg.output_format

    def test_reload(self, tmp_path):
        path = write(tmp_path, MINIMAL)
        cfg = Config(path)
        write(tmp_path, dict(MINIMAL, numerics=dict(MINIMAL['numerics'], seed=9)))
        cfg.reload()
        assert cfg.seed == 9
