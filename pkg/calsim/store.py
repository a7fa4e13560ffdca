"""
The prepared corpus store: a folder that holds the segmented collection, the vocabulary and the
feature matrix of the union items so that runs never have to tokenize the collection again.
"""
import os
import json
import logging
import typing as t
from dataclasses import dataclass

import pandas as pd
import scipy.sparse as sp

from calsim.corpus import Collection
from calsim.corpus import Document
from calsim.corpus import QrelsMap
from calsim.corpus import UnionItem
from calsim.corpus import LabelStatsReport
from calsim.corpus import DOCUMENT
from calsim.corpus import SENTENCE
from calsim.corpus import load_qrels
from calsim.corpus import sentence_id_span
from calsim.features import FeatureSpace
from calsim.features import Vocabulary
from calsim.utils import NULL_LOGGER
from calsim.utils import StoreError

DOCUMENTS_FILE = 'documents.jsonl'
VOCABULARY_FILE = 'vocabulary.tsv'
FEATURES_FILE = 'features.npz'
ITEMS_FILE = 'items.tsv'
DOC_QRELS_FILE = 'qrels.doc.txt'
SENT_QRELS_FILE = 'qrels.sent.txt'
STATS_FILE = 'stats.csv'
FIRST_POSITION_FILE = 'first_position.csv'


@dataclass
class CorpusStore:
    path: str
    collection: Collection
    vocabulary: Vocabulary
    space: FeatureSpace
    doc_qrels: t.Optional[QrelsMap] = None
    sent_qrels: t.Optional[QrelsMap] = None


def save_store(path: str,
               collection: Collection,
               vocabulary: Vocabulary,
               space: FeatureSpace,
               doc_qrels: t.Optional[QrelsMap] = None,
               sent_qrels: t.Optional[QrelsMap] = None,
               stats: t.Optional[LabelStatsReport] = None,
               logger: logging.Logger = NULL_LOGGER,
               ) -> None:
    """
    Writes the store files into the folder ``path``, which is created if it does not exist.
    """
    os.makedirs(path, exist_ok=True)

    with open(os.path.join(path, DOCUMENTS_FILE), mode='w', encoding='utf-8') as file:
        for document in collection:
            record = {
                'id': document.doc_id,
                'text': document.text,
                'sentences': [[span.char_start, span.char_end] for span in document.sentences],
            }
            file.write(json.dumps(record, ensure_ascii=False) + '\n')

    vocabulary.write(os.path.join(path, VOCABULARY_FILE))
    sp.save_npz(os.path.join(path, FEATURES_FILE), space.matrix, compressed=True)

    with open(os.path.join(path, ITEMS_FILE), mode='w', encoding='utf-8') as file:
        for item in space.items:
            file.write(f'{item.item_id}\t{item.kind}\t{item.parent_doc}\n')

    if doc_qrels is not None:
        doc_qrels.write(os.path.join(path, DOC_QRELS_FILE))
    if sent_qrels is not None:
        sent_qrels.write(os.path.join(path, SENT_QRELS_FILE))
    if stats is not None:
        write_stats(path, stats)

    logger.info(f'saved store with {len(space)} union items and {len(vocabulary)} terms to {path}')


def write_stats(path: str, stats: LabelStatsReport) -> None:
    pd.DataFrame(stats.rows()).to_csv(os.path.join(path, STATS_FILE), index=False, float_format='%.6f')

    positions = sorted(stats.overall.first_positions.items())
    frame = pd.DataFrame(positions, columns=['position', 'count'])
    frame.to_csv(os.path.join(path, FIRST_POSITION_FILE), index=False)


def load_store(path: str, logger: logging.Logger = NULL_LOGGER) -> CorpusStore:
    """
    Loads the store from the folder ``path``.

    :raises StoreError: If a required file is missing or the files are inconsistent with each other
    """
    for name in (DOCUMENTS_FILE, VOCABULARY_FILE, FEATURES_FILE, ITEMS_FILE):
        if not os.path.exists(os.path.join(path, name)):
            raise StoreError(f'{path}: the store file "{name}" is missing, was "calsim prepare" run?')

    documents = []
    with open(os.path.join(path, DOCUMENTS_FILE), encoding='utf-8') as file:
        for line in file:
            record = json.loads(line)
            spans = tuple(
                sentence_id_span(record['id'], index, start, end)
                for index, (start, end) in enumerate(record['sentences'])
            )
            documents.append(Document(record['id'], record['text'], spans))

    collection = Collection(documents, name=os.path.basename(os.path.normpath(path)))
    vocabulary = Vocabulary.read(os.path.join(path, VOCABULARY_FILE))
    matrix = sp.load_npz(os.path.join(path, FEATURES_FILE)).tocsr()

    items = []
    with open(os.path.join(path, ITEMS_FILE), encoding='utf-8') as file:
        for line in file:
            item_id, kind, parent_doc = line.rstrip('\n').split('\t')
            if kind not in (DOCUMENT, SENTENCE):
                raise StoreError(f'{path}: unknown item kind "{kind}" of item "{item_id}"')
            items.append(UnionItem(item_id, kind, parent_doc))

    expected = [item.item_id for item, _ in collection.union_items()]
    if [item.item_id for item in items] != expected:
        raise StoreError(f'{path}: the items do not match the documents of the store')
    if matrix.shape != (len(items), len(vocabulary)):
        raise StoreError(f'{path}: feature matrix of shape {matrix.shape} does not match '
                         f'{len(items)} items and {len(vocabulary)} terms')

    doc_qrels = None
    if os.path.exists(os.path.join(path, DOC_QRELS_FILE)):
        doc_qrels = load_qrels(os.path.join(path, DOC_QRELS_FILE), DOCUMENT)

    sent_qrels = None
    if os.path.exists(os.path.join(path, SENT_QRELS_FILE)):
        sent_qrels = load_qrels(os.path.join(path, SENT_QRELS_FILE), SENTENCE)

    logger.info(f'loaded store {path} with {collection.num_documents} documents')
    return CorpusStore(
        path=path,
        collection=collection,
        vocabulary=vocabulary,
        space=FeatureSpace(matrix, items),
        doc_qrels=doc_qrels,
        sent_qrels=sent_qrels,
    )
