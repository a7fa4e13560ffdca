"""
Utility methods
"""
import os
import sys
import json
import zlib
import logging
import pathlib
import importlib.util
import typing as t

import jinja2 as j2
import numpy as np

# Contains the absolute string path to the parent directory of this file
PATH = pathlib.Path(__file__).parent.absolute()
VERSION_PATH = os.path.join(PATH, 'VERSION')
TEMPLATE_PATH = os.path.join(PATH, 'templates')
PLUGINS_PATH = os.path.join(PATH, 'plugins')

TEMPLATE_ENV = j2.Environment(
    loader=j2.FileSystemLoader(TEMPLATE_PATH),
    autoescape=j2.select_autoescape(),
)
TEMPLATE_ENV.globals.update({
    'os': os,
    'len': len,
})

NULL_LOGGER = logging.Logger('NULL')
NULL_LOGGER.addHandler(logging.NullHandler())


# == ERRORS ==
# Every problem that is caused by the *content* of the input data (as opposed to the way a command
# was invoked) derives from DataError. The command line interface maps these to exit code 2.

class DataError(ValueError):
    pass


class DuplicateDocumentError(DataError):

    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f'duplicate document id "{doc_id}"')


class QrelsFormatError(DataError):

    def __init__(self, path: str, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f'{path}:{line_number}: {message}')


class InconsistentLabelsError(DataError):
    pass


class TrainingError(DataError):
    pass


class BudgetError(DataError):
    pass


class StoreError(DataError):
    pass


class TopicMismatchError(DataError):

    def __init__(self, message: str, orphans: t.Iterable[str]):
        self.orphans = sorted(orphans)
        super().__init__(f'{message}: {", ".join(self.orphans)}')


class CustomJsonEncoder(json.encoder.JSONEncoder):
    """
    custom json encoder class which is used when encoding the archive metadata and data into a
    persistent json file.

    This specific class implements the serialization of numpy arrays and numpy scalars, which come
    out of the evaluation code all the time, as well as sets (sorted, so that the output is stable).
    """
    def default(self, value):

        if isinstance(value, np.ndarray):
            return value.tolist()
        elif isinstance(value, np.generic):
            return value.item()
        elif isinstance(value, (set, frozenset)):
            return sorted(value)

        return super().default(value)


def get_version():
    with open(VERSION_PATH) as file:
        return file.read().replace(' ', '').replace('\n', '')


class Singleton(type):
    """
    This is metaclass definition, which implements the singleton pattern. Whatever class uses this as
    a metaclass does not return a NEW instance upon calling the constructor but always the same one.

    .. code-block:: python

        class MySingleton(metaclass=Singleton):
            pass

        a = MySingleton()
        b = MySingleton()
        print(a is b) # true
    """
    _instances = {}

    def __call__(cls, *args, **kwargs):
        if cls not in cls._instances:
            cls._instances[cls] = super(Singleton, cls).__call__(*args, **kwargs)
        return cls._instances[cls]


def dynamic_import(path: str):
    """
    Given the absolute string ``path`` to a python module, this function will dynamically import that
    module and return the module object instance that represents that module.

    :param path: The absolute string path to a python module

    :returns: A module object instance
    """
    # The plugin modules are all called "main.py" so the folder name is used to keep the entries in
    # sys.modules apart from each other.
    module_name = f'calsim_plugin_{os.path.basename(os.path.dirname(path))}'
    module_spec = importlib.util.spec_from_file_location(module_name, path)
    module = importlib.util.module_from_spec(module_spec)
    sys.modules[module_name] = module
    module_spec.loader.exec_module(module)
    return module


def stable_hash(value: str) -> int:
    """
    Returns a non-negative integer hash of the string ``value`` which - unlike the builtin ``hash`` -
    does not change between interpreter sessions.
    """
    return zlib.crc32(value.encode('utf-8')) & 0xFFFFFFFF


def derive_seed(seed: int, *keys: str) -> int:
    """
    Derives a child seed from the base ``seed`` and any number of string ``keys``, for example the
    topic id and the strategy code of a single run. The same inputs always give the same seed.

    :param seed: The base integer seed, usually taken from the run manifest
    :param keys: String identifiers that distinguish the child from its siblings

    :returns: int
    """
    entropy = [int(seed)] + [stable_hash(key) for key in keys]
    sequence = np.random.SeedSequence(entropy)
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def ceil_div(value: int, divisor: int) -> int:
    return -(-value // divisor)


