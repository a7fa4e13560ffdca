import os
import copy
import inspect
import warnings
import typing as t

from calsim.plugin import PluginManager
from calsim.plugin import Plugin
from calsim.utils import PLUGINS_PATH
from calsim.utils import Singleton
from calsim.utils import dynamic_import


# These are the package wide default values. Every value can be overwritten for a single run through
# the run manifest or the command line flags, but the manifest that is written into the output
# directory always contains the complete set so that a run can be traced back to its settings.
DEFAULTS: dict = {
    # regularization parameter of the Pegasos solver
    'lambda': 1e-4,
    # number of Pegasos updates per training
    'iterations': 200_000,
    # number of items that are temporarily added as non-relevant examples before each training
    'random_negatives': 100,
    # "unlabeled" draws the random negatives from items not in the persistent training set,
    # "collection" draws from all items of the training granularity.
    'negative_pool': 'unlabeled',
    # the batch size grows by ceil(B / batch_growth) after every batch
    'batch_growth': 10,
    # number of threads that score the rows of the feature space before every selection
    'score_workers': 1,
    'budget': '4R+1000',
    'seed': 1,
    'lambda_grid': '0:1:0.05',
    'recall_a': [1, 2, 4],
    'recall_b': [0, 100, 1000],
    # whether the progress plugin prints one line per batch
    'progress': True,
}


class Config(metaclass=Singleton):
    """
    The global settings of calsim: the package defaults of every simulation and evaluation setting
    together with the plugin manager that receives the hooks of all simulations and archives. Due to
    the singleton metaclass every call of the constructor returns the same instance.

    .. code-block:: python

        config = Config()
        config.update(iterations=50_000)
        manifest = RunManifest.load(config=config)

    The native plugins are loaded when the instance is created for the first time.
    """
    def __init__(self):
        self.data: t.Dict[str, object] = copy.deepcopy(DEFAULTS)
        self.plugins: t.Dict[str, Plugin] = {}
        self.pm = PluginManager(config=self)

        self.load_plugins()

    def get(self, key: str, default: object = None) -> object:
        return self.data.get(key, default)

    def update(self, **values) -> None:
        """
        Overwrites the package defaults for the rest of the session.

        :raises KeyError: For a key that is not one of the package defaults
        """
        unknown = sorted(set(values) - set(DEFAULTS))
        if unknown:
            raise KeyError(f'unknown settings {", ".join(unknown)}')

        self.data.update(values)

    def load_plugins(self, path: str = PLUGINS_PATH) -> t.List[str]:
        """
        Loads the plugins of every sub folder of ``path`` that contains a "main.py" module. A plugin
        that fails to import only causes a warning.

        :returns: The names of the loaded plugins
        """
        loaded = []
        for name in sorted(os.listdir(path)):
            module_path = os.path.join(path, name, 'main.py')
            if not os.path.isfile(module_path):
                continue

            try:
                self.load_plugin_from_module(name, dynamic_import(module_path))
                loaded.append(name)
            except ImportError as exc:
                warnings.warn(f'plugin "{name}" could not be imported: {exc}')

        return loaded

    def load_plugin_from_module(self, name: str, module: object) -> None:
        """
        Instantiates and registers every ``Plugin`` subclass of ``module`` under the given ``name``.
        """
        classes = [obj for _, obj in inspect.getmembers(module, inspect.isclass)
                   if issubclass(obj, Plugin) and obj is not Plugin]
        for cls in classes:
            plugin = cls(config=self)
            plugin.register()
            self.plugins[name] = plugin
            self.pm.apply_hook('plugin_registered', name=name, plugin=plugin)

    # ~ isolation
    # tests swap the whole state out and back in, see testing.ConfigIsolation

    def export_state(self) -> t.Dict[str, object]:
        return {'data': self.data, 'plugins': self.plugins, 'pm': self.pm}

    def import_state(self, state: t.Dict[str, object]) -> None:
        self.data = state['data']
        self.plugins = state['plugins']
        self.pm = state['pm']

    def reset_state(self) -> None:
        """
        Resets the config to the package defaults with an empty plugin manager. The native plugins
        are not loaded again.
        """
        self.data = copy.deepcopy(DEFAULTS)
        self.plugins = {}
        self.pm = PluginManager(config=self)
