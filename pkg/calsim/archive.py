import os
import sys
import json
import time
import logging
import traceback
import typing as t

import pandas as pd

from calsim.config import Config
from calsim.utils import TEMPLATE_ENV
from calsim.utils import CustomJsonEncoder
from calsim.utils import get_version

METADATA_FILE = 'calsim_meta.json'
DATA_FILE = 'calsim_data.json'
LOG_FILE = 'calsim_out.log'


class Archive:
    """
    The output folder of one calsim command.

    An archive is used as a context manager around the work of a command. On entering, the folder is
    created and a logger is set up that writes to stdout as well as to the log file inside the folder.
    On exit the metadata and the data store are saved as JSON files. If the context is left because
    of an exception, the traceback is written to the log, the status becomes "failed" and the
    exception propagates.

    .. code-block:: python

        with Archive('results/run', command='run') as archive:
            archive.log('starting')
            archive['runs/T1/ddd/judgments'] = 100
            archive.commit_raw('notes.txt', 'content')

    The metadata deliberately contains no wall clock times, so that repeating a command with the same
    inputs produces identical files. The duration only appears in the log.

    :param path: The absolute path of the archive folder
    :param command: The name of the command that creates the archive
    :param parameters: The effective settings of the command, recorded in the metadata
    """
    def __init__(self,
                 path: str,
                 command: str,
                 parameters: t.Optional[dict] = None,
                 ):
        self.path = os.path.abspath(path)
        self.command = command
        self.parameters = parameters or {}
        self.config = Config()

        self.metadata: dict = {
            'command': command,
            'version': get_version(),
            'status': 'created',
            'parameters': self.parameters,
        }
        self.data: dict = {}

        self.error: t.Optional[str] = None
        self.start_time: t.Optional[float] = None
        self.duration: float = 0.0

        self.log_formatter = logging.Formatter('%(asctime)s - %(message)s')
        self.logger = logging.Logger(name=f'calsim.{command}', level=logging.INFO)
        stream_handler = logging.StreamHandler(sys.stdout)
        stream_handler.setFormatter(self.log_formatter)
        self.logger.addHandler(stream_handler)
        self.file_handler: t.Optional[logging.FileHandler] = None

    # ~ paths

    @property
    def metadata_path(self) -> str:
        return os.path.join(self.path, METADATA_FILE)

    @property
    def data_path(self) -> str:
        return os.path.join(self.path, DATA_FILE)

    @property
    def log_path(self) -> str:
        return os.path.join(self.path, LOG_FILE)

    # ~ lifecycle

    def initialize(self) -> None:
        os.makedirs(self.path, exist_ok=True)

        # The log file is recreated so that the log of a repeated command does not accumulate
        self.file_handler = logging.FileHandler(self.log_path, mode='w')
        self.file_handler.setFormatter(self.log_formatter)
        self.logger.addHandler(self.file_handler)

        self.start_time = time.time()
        self.metadata['status'] = 'running'
        self.save_metadata()

        template = TEMPLATE_ENV.get_template('archive_start.out.j2')
        self.log_lines(template.render({'archive': self}).split('\n'))

        self.config.pm.apply_hook('archive_initialized', archive=self)

    def finalize(self) -> None:
        self.duration = time.time() - self.start_time
        self.metadata['status'] = 'failed' if self.error else 'done'
        self.save_metadata()
        self.save_data()

        if self.error:
            template = TEMPLATE_ENV.get_template('archive_error.out.j2')
            self.log_lines(template.render({'archive': self}).split('\n'))

        template = TEMPLATE_ENV.get_template('archive_end.out.j2')
        self.log_lines(template.render({'archive': self}).split('\n'))

        self.config.pm.apply_hook('archive_finalized', archive=self)

        self.logger.removeHandler(self.file_handler)
        self.file_handler.close()

    def __enter__(self) -> 'Archive':
        self.initialize()
        return self

    def __exit__(self, exc_type, exc_value, exc_traceback) -> bool:
        if exc_type is not None:
            self.error = ''.join(traceback.format_exception(exc_type, exc_value, exc_traceback))
            self.metadata['error'] = f'{exc_type.__name__}: {exc_value}'

        self.finalize()
        return False

    # ~ logging

    def log(self, message: str, level: int = logging.INFO) -> None:
        self.logger.log(level, message)

    def log_lines(self, lines: t.List[str]) -> None:
        for line in lines:
            self.log(line)

    # ~ storage

    def save_metadata(self) -> None:
        with open(self.metadata_path, mode='w') as file:
            file.write(json.dumps(self.metadata, indent=4, sort_keys=True, cls=CustomJsonEncoder))

    def save_data(self) -> None:
        with open(self.data_path, mode='w') as file:
            file.write(json.dumps(self.data, indent=4, sort_keys=True, cls=CustomJsonEncoder))

    def __getitem__(self, key: str) -> t.Any:
        """
        Retrieves a value from the data store. The key may describe a nested location with "/"
        separators, such that ``archive['runs/T1/ddd']`` is ``archive.data['runs']['T1']['ddd']``.
        """
        current = self.data
        for part in key.split('/'):
            if part not in current:
                raise KeyError(f'The namespace "{part}" does not exist within the archive data storage')
            current = current[part]

        return current

    def __setitem__(self, key: str, value: t.Any) -> None:
        """
        Stores a value in the data store at the nested location described by the "/" separated
        ``key``. Missing intermediate levels are created.
        """
        if not isinstance(key, str):
            raise ValueError('The archive data storage only supports string keys')

        keys = key.split('/')
        current = self.data
        for part in keys[:-1]:
            current = current.setdefault(part, {})

        current[keys[-1]] = value

    def open(self, file_name: str, *args, **kwargs):
        path = os.path.join(self.path, file_name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        return open(path, *args, **kwargs)

    def commit_json(self, file_name: str, data: t.Union[dict, list]) -> None:
        content = json.dumps(data, indent=4, sort_keys=True, cls=CustomJsonEncoder)
        with self.open(file_name, mode='w') as file:
            file.write(content)

        self.config.pm.apply_hook(
            'archive_commit_json',
            archive=self,
            name=file_name,
            data=data,
            content=content,
        )

    def commit_raw(self, file_name: str, content: str) -> None:
        with self.open(file_name, mode='w') as file:
            file.write(content)

        self.config.pm.apply_hook(
            'archive_commit_raw',
            archive=self,
            name=file_name,
            content=content,
        )

    def commit_frame(self, file_name: str, frame: pd.DataFrame) -> None:
        """
        Writes the ``frame`` as a CSV file into the archive.
        """
        self.commit_raw(file_name, frame.to_csv(index=False, float_format='%.6f'))

    @classmethod
    def is_archive(cls, path: str) -> bool:
        return os.path.isdir(path) and os.path.exists(os.path.join(path, METADATA_FILE))

    @classmethod
    def load_metadata(cls, path: str) -> dict:
        with open(os.path.join(path, METADATA_FILE)) as file:
            return json.load(file)
