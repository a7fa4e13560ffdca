import os
import typing as t

from calsim.config import Config
from calsim.corpus import QrelsMap
from calsim.corpus import SegmenterConfig
from calsim.corpus import ingest_documents
from calsim.corpus import propagate_nonrelevant
from calsim.features import FeatureSpace
from calsim.store import CorpusStore
from calsim.store import save_store


class ConfigIsolation:
    """
    This class is a context manager that can be used to properly isolate the config singleton
    during testing. The config class is a global singleton and therefore the constructor always
    returns the same object, so tests that modify it would leak into each other otherwise.

    .. code-block:: python

        with ConfigIsolation() as config:
            config.data['iterations'] = 100

        # afterwards the config is restored to the previous state

    On entering, the state of the config is saved and the config is reset to the package defaults
    without any plugins. On exit, the saved state is restored.
    """
    def __init__(self, reset: bool = True):
        self.config = Config()
        self.reset = reset
        self.config_state: t.Optional[dict] = None

    def __enter__(self) -> Config:
        self.config_state = self.config.export_state()
        if self.reset:
            self.config.reset_state()

        return self.config

    def __exit__(self, *args):
        self.config.import_state(self.config_state)


def build_store(documents: t.Sequence[t.Tuple[str, str]],
                doc_qrels: t.Optional[QrelsMap] = None,
                sent_qrels: t.Optional[QrelsMap] = None,
                path: t.Optional[str] = None,
                segmenter: SegmenterConfig = SegmenterConfig(),
                ) -> CorpusStore:
    """
    Builds an in-memory corpus store from (doc_id, text) tuples. The sentence labels are completed
    with the propagation of the non-relevant documents. If a ``path`` is given, the store is also
    saved to that folder.
    """
    collection = ingest_documents(documents, segmenter, name=os.path.basename(path) if path else 'test')
    vocabulary, space = FeatureSpace.build(collection)
    if doc_qrels is not None:
        sent_qrels = propagate_nonrelevant(doc_qrels, collection, sent_qrels)

    if path is not None:
        save_store(path, collection, vocabulary, space, doc_qrels, sent_qrels)

    return CorpusStore(
        path=path or '',
        collection=collection,
        vocabulary=vocabulary,
        space=space,
        doc_qrels=doc_qrels,
        sent_qrels=sent_qrels,
    )
