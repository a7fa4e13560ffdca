import os

import pytest

from calsim.config import Config
from calsim.config import DEFAULTS
from calsim.plugin import Plugin
from calsim.utils import dynamic_import
from calsim.testing import ConfigIsolation

from .util import ASSETS_PATH


class TestConfig:
    """
    Tests the "Config" singleton class
    """

    def test_is_singleton(self):
        """
        The config class needs to be a "singleton": the constructor always returns the same
        instance.
        """
        config1 = Config()
        config2 = Config()

        assert id(config1) == id(config2)

    def test_defaults(self):
        config = Config()
        assert config.get('lambda') == 1e-4
        assert config.get('iterations') == 200_000
        assert config.get('random_negatives') == 100
        assert config.get('budget') == '4R+1000'
        assert config.get('unknown', 'fallback') == 'fallback'

    def test_native_plugins_are_loaded(self):
        """
        On the first construction, the config loads the native plugins. The progress plugin
        registers itself for the simulation hooks.
        """
        config = Config()
        assert 'progress' in config.plugins
        assert len(config.pm.hooks['simulation_batch_finished']) >= 1

    def test_export_import_state(self):
        """
        It should be able to export the current state of the config with "export_state", reset it
        and later restore the exported state with "import_state".
        """
        with ConfigIsolation(reset=False) as config:
            config.data['string'] = 'hello world'
            config.plugins['plugin'] = Plugin(config=config)

            config_state = config.export_state()
            assert isinstance(config_state, dict)

            # Resetting goes back to the defaults without any plugins
            config.reset_state()
            assert 'string' not in config.data
            assert config.data == DEFAULTS
            assert len(config.plugins) == 0
            assert len(config.pm) == 0

            config.import_state(config_state)
            assert config.data['string'] == 'hello world'
            assert 'plugin' in config.plugins

    def test_config_isolation(self):
        """
        Changes made inside of a ConfigIsolation context do not leak out of it.
        """
        with ConfigIsolation() as config:
            config.data['iterations'] = 10
            assert Config().get('iterations') == 10

        assert Config().get('iterations') == DEFAULTS['iterations']

    def test_load_test_plugin(self):
        """
        The "load_plugin_from_module" method registers all the plugin classes of a module. The test
        plugin counts the registered plugins with the "plugin_registered" hook.
        """
        module = dynamic_import(os.path.join(ASSETS_PATH, 'test_plugin', 'main.py'))

        with ConfigIsolation() as config:
            config.load_plugin_from_module('test_plugin', module)
            assert 'test_plugin' in config.plugins
            assert config.data['plugin_count'] == 1

        assert 'test_plugin' not in Config().plugins
        assert 'plugin_count' not in Config().data

    def test_update(self):
        with ConfigIsolation() as config:
            config.update(iterations=500, budget='2R')
            assert config.get('iterations') == 500
            assert config.get('budget') == '2R'

            with pytest.raises(KeyError, match='iteration'):
                config.update(iteration=500)

    def test_load_plugins_from_folder(self):
        """
        Every sub folder with a "main.py" module is loaded as a plugin, other files are ignored.
        """
        with ConfigIsolation() as config:
            loaded = config.load_plugins(ASSETS_PATH)
            assert loaded == ['test_plugin']
            assert config.data['plugin_count'] == 1
