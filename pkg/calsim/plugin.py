"""
Hooks into the simulation loop and the archives. See HOOKS.md for the names and the arguments of
all the hooks that calsim applies.
"""
import typing as t
from collections import defaultdict
from dataclasses import dataclass, field


def hook(hook_name: str, priority: int = 0) -> t.Callable:
    """
    Decorator which marks a method of a ``Plugin`` subclass as the implementation of the hook with
    the string name ``hook_name``. Hooks with a higher ``priority`` are executed first.
    """
    def decorator(function: t.Callable):
        function.__hook__ = hook_name
        function.__priority__ = priority
        return function

    return decorator


class StopHook(Exception):
    """
    Raising this from inside a hook implementation stops the execution of all the remaining
    implementations of the same hook. The ``value`` becomes the return value of ``apply_hook``.
    """
    def __init__(self, value, *args, **kwargs):
        self.value = value
        super().__init__(*args, **kwargs)


@dataclass(order=True)
class HookEntry:
    # entries sort by descending priority, then by registration order
    sort_key: t.Tuple[int, int]
    function: t.Callable = field(compare=False)
    owner: t.Optional[object] = field(default=None, compare=False)

    def __call__(self, *args, **kwargs):
        return self.function(*args, **kwargs)


class Plugin:
    """
    Base class of all plugins. Every method decorated with ``hook`` is registered with the plugin
    manager of the config when ``register`` is called.
    """
    def __init__(self, config: object, *args, **kwargs):
        self.config = config

    def hook_methods(self) -> t.Iterator[t.Callable]:
        for attribute_name in dir(self):
            attribute = getattr(self, attribute_name)
            if callable(attribute) and hasattr(attribute, '__hook__'):
                yield attribute

    def register(self) -> None:
        for method in self.hook_methods():
            self.config.pm.register_hook(method.__hook__, method, method.__priority__, owner=self)

    def unregister(self) -> None:
        self.config.pm.remove_owner(self)


class PluginManager:
    """
    Maintains the mapping of hook names to the callables registered for them. The engine and the
    archives call ``apply_hook`` at well defined points of a simulation and every registered callable
    receives the config as the first positional argument and the hook specific keyword arguments.
    """
    def __init__(self, config: object):
        self.config = config
        self.hooks: t.Dict[str, t.List[HookEntry]] = defaultdict(list)
        self.counter = 0

    def hook(self, hook_name: str, priority: int = 0) -> t.Callable:

        def decorator(function):
            self.register_hook(hook_name, function, priority)
            return function

        return decorator

    def register_hook(self,
                      hook_name: str,
                      function: t.Callable,
                      priority: int = 0,
                      owner: t.Optional[object] = None,
                      ) -> None:
        self.counter += 1
        self.hooks[hook_name].append(HookEntry((-priority, self.counter), function, owner))
        self.hooks[hook_name].sort()

    def remove_owner(self, owner: object) -> int:
        """
        Removes all the hook callables that were registered by ``owner``.

        :returns: The number of removed callables
        """
        removed = 0
        for hook_name, entries in self.hooks.items():
            kept = [entry for entry in entries if entry.owner is not owner]
            removed += len(entries) - len(kept)
            self.hooks[hook_name] = kept

        return removed

    def apply_hook(self, hook_name: str, **kwargs) -> t.Any:
        result = None
        for entry in list(self.hooks.get(hook_name, [])):
            try:
                result = entry(self.config, **kwargs)
            except StopHook as stop:
                result = stop.value
                break

        return result

    def __len__(self) -> int:
        return sum(len(entries) for entries in self.hooks.values())
