"""
Document collections, sentence segmentation and relevance judgments at document and sentence
granularity.

A collection is considered as the *union* of its documents and its sentences. Every document and
every sentence is one scorable ``UnionItem``. Sentences are identified by the id of their parent
document, a "#" and their zero-based index, which makes the sentence id the join key between the
two granularities.
"""
import os
import re
import json
import logging
import typing as t
from collections import Counter
from dataclasses import dataclass, field

from calsim.utils import NULL_LOGGER
from calsim.utils import DataError
from calsim.utils import DuplicateDocumentError
from calsim.utils import QrelsFormatError
from calsim.utils import InconsistentLabelsError

DOCUMENT = 'document'
SENTENCE = 'sentence'
GRANULARITIES = (DOCUMENT, SENTENCE)

SENTENCE_ID_PATTERN = re.compile(r'^(?P<doc_id>.+)#(?P<index>\d+)$')

# Titles precede a name, a period after them never ends a sentence.
TITLE_ABBREVIATIONS = frozenset([
    'mr', 'mrs', 'ms', 'dr', 'prof', 'gen', 'gov', 'sen', 'rep',
])

# A period after these only continues the sentence if the next word is not capitalized, since most
# of them end sentences as well ("the answer was no.").
DEFAULT_ABBREVIATIONS = frozenset([
    'sr', 'jr', 'st', 'vs', 'etc', 'e.g', 'i.e', 'inc', 'ltd', 'co', 'corp', 'no', 'fig', 'jan', 'feb',
    'mar', 'apr', 'jun', 'jul', 'aug', 'sep', 'sept', 'oct', 'nov', 'dec', 'u.s', 'dept', 'approx',
])

# A sentence ends after a run of terminal punctuation (optionally followed by closing quotes or
# brackets) which in turn is followed by whitespace.
BOUNDARY_PATTERN = re.compile(r'[.!?]+[\'")\]]*(?=\s)')
ABBREVIATION_PATTERN = re.compile(r'([^\W_]+(?:\.[^\W_]+)*)\.$')


def sentence_id(doc_id: str, index: int) -> str:
    return f'{doc_id}#{index}'


def parent_of(item_id: str) -> str:
    """
    Returns the document id of the given sentence id or the ``item_id`` itself if it does not have
    the form of a sentence id.
    """
    match = SENTENCE_ID_PATTERN.match(item_id)
    if match:
        return match.group('doc_id')

    return item_id


# == DOMAIN TYPES ==

@dataclass(frozen=True)
class SentenceSpan:
    sent_id: str
    char_start: int
    char_end: int

    @property
    def index(self) -> int:
        return int(self.sent_id.rsplit('#', 1)[1])

    @property
    def length(self) -> int:
        return self.char_end - self.char_start


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    sentences: t.Tuple[SentenceSpan, ...]

    def sentence_text(self, span: SentenceSpan) -> str:
        return self.text[span.char_start:span.char_end]

    def sentence_texts(self) -> t.List[str]:
        return [self.sentence_text(span) for span in self.sentences]

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class UnionItem:
    item_id: str
    kind: str
    parent_doc: str


@dataclass(frozen=True)
class PassageJudgment:
    topic_id: str
    doc_id: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class SegmenterConfig:
    """
    Configuration of the sentence segmentation.

    :param mode: Either "rules" for the built-in splitter on terminal punctuation or "presegmented"
        in which case the sentence offsets are supplied along with the documents and copied verbatim.
    :param abbreviations: Lower case tokens (without the trailing period) after which a period does
        not end a sentence, unless the next word starts with an upper case letter.
    :param titles: Lower case tokens after which a period never ends a sentence.
    """
    mode: str = 'rules'
    abbreviations: t.FrozenSet[str] = DEFAULT_ABBREVIATIONS
    titles: t.FrozenSet[str] = TITLE_ABBREVIATIONS

    def __post_init__(self):
        if self.mode not in ('rules', 'presegmented'):
            raise ValueError(f'unknown segmenter mode "{self.mode}"')


class Collection:
    """
    An immutable, ordered collection of segmented documents.

    The documents can be accessed by index or by id and iterating the collection yields them in
    ingestion order. The ``union_items`` method yields the union of documents and sentences, where
    every document is immediately followed by its own sentences.
    """
    def __init__(self, documents: t.Sequence[Document], name: str = 'collection'):
        self.name = name
        self.documents: t.Tuple[Document, ...] = tuple(documents)
        self.index: t.Dict[str, int] = {}
        for position, document in enumerate(self.documents):
            if document.doc_id in self.index:
                raise DuplicateDocumentError(document.doc_id)
            self.index[document.doc_id] = position

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> t.Iterator[Document]:
        return iter(self.documents)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.index

    def __getitem__(self, key: t.Union[int, str]) -> Document:
        if isinstance(key, str):
            return self.documents[self.index[key]]

        return self.documents[key]

    @property
    def num_documents(self) -> int:
        return len(self.documents)

    @property
    def num_sentences(self) -> int:
        return sum(len(document.sentences) for document in self.documents)

    @property
    def num_union_items(self) -> int:
        return self.num_documents + self.num_sentences

    def union_items(self) -> t.Iterator[t.Tuple[UnionItem, str]]:
        """
        Yields tuples (item, text) for every item of the union of documents and sentences.
        """
        for document in self.documents:
            yield UnionItem(document.doc_id, DOCUMENT, document.doc_id), document.text
            for span in document.sentences:
                yield UnionItem(span.sent_id, SENTENCE, document.doc_id), document.sentence_text(span)

    def statistics(self) -> t.Dict[str, int]:
        return {
            'documents': self.num_documents,
            'sentences': self.num_sentences,
            'union_items': self.num_union_items,
        }


class QrelsMap:
    """
    Binary relevance labels at one granularity: a mapping topic id -> item id -> bool.

    Items without an entry are treated as non-relevant by ``label``, which is the standard pooling
    assumption for unjudged documents. A QrelsMap is not modified after construction, operations
    that add labels return a new object.

    :param granularity: Either "document" or "sentence"
    :param entries: The nested label dictionary
    """
    def __init__(self,
                 granularity: str,
                 entries: t.Optional[t.Dict[str, t.Dict[str, bool]]] = None):
        if granularity not in GRANULARITIES:
            raise ValueError(f'unknown qrels granularity "{granularity}"')

        self.granularity = granularity
        self.entries: t.Dict[str, t.Dict[str, bool]] = {
            topic: dict(labels) for topic, labels in (entries or {}).items()
        }

    def __contains__(self, key: t.Tuple[str, str]) -> bool:
        topic_id, item_id = key
        return item_id in self.entries.get(topic_id, {})

    def __len__(self) -> int:
        return sum(len(labels) for labels in self.entries.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QrelsMap):
            return NotImplemented

        return self.granularity == other.granularity and self.entries == other.entries

    def topics(self) -> t.List[str]:
        return sorted(self.entries.keys())

    def label(self, topic_id: str, item_id: str) -> bool:
        return self.entries.get(topic_id, {}).get(item_id, False)

    def judged(self, topic_id: str) -> t.Dict[str, bool]:
        return self.entries.get(topic_id, {})

    def relevant(self, topic_id: str) -> t.Set[str]:
        return {item for item, label in self.entries.get(topic_id, {}).items() if label}

    def num_relevant(self, topic_id: str) -> int:
        """
        Returns R, the number of items judged relevant for the given topic.
        """
        return len(self.relevant(topic_id))

    def items(self) -> t.Iterator[t.Tuple[str, str, bool]]:
        for topic_id in self.topics():
            for item_id in sorted(self.entries[topic_id]):
                yield topic_id, item_id, self.entries[topic_id][item_id]

    def write(self, path: str) -> None:
        """
        Writes the labels in the TREC 4-column format "topic 0 item grade", sorted by topic and item.
        """
        with open(path, mode='w') as file:
            for topic_id, item_id, label in self.items():
                file.write(f'{topic_id} 0 {item_id} {int(label)}\n')


# == SEGMENTATION ==

def segment_sentences(text: str,
                      config: SegmenterConfig = SegmenterConfig(),
                      doc_id: str = '',
                      offsets: t.Optional[t.Sequence[t.Tuple[int, int]]] = None,
                      ) -> t.List[SentenceSpan]:
    """
    Splits the given ``text`` into an ordered list of sentence spans with half-open character
    offsets.

    In the "rules" mode a sentence ends after terminal punctuation (".", "!", "?") that is followed by
    whitespace. A period does not end the sentence after a title such as "Dr." or after
    one of the abbreviations if the next word is not capitalized ("No. 5", "etc. and"). Leading and
    trailing whitespace is not part of any span. In the "presegmented" mode the given ``offsets`` are
    validated and copied verbatim.

    Degenerate text (empty or whitespace only) yields a single span covering the whole text.

    :param text: The document text
    :param config: The segmenter configuration
    :param doc_id: The id of the parent document, used to construct the sentence ids
    :param offsets: The (start, end) pairs of the pre-segmented input. Required in the
        "presegmented" mode and ignored otherwise.

    :returns: A list of SentenceSpan
    """
    if config.mode == 'presegmented':
        if offsets is None:
            raise DataError(f'no pre-segmented sentence offsets for document "{doc_id}"')

        return _copy_offsets(text, offsets, doc_id)

    pairs = _split_on_rules(text, config.abbreviations, config.titles)
    return [sentence_id_span(doc_id, index, start, end) for index, (start, end) in enumerate(pairs)]


def sentence_id_span(doc_id: str, index: int, start: int, end: int) -> SentenceSpan:
    return SentenceSpan(sentence_id(doc_id, index), start, end)


def _split_on_rules(text: str,
                    abbreviations: t.FrozenSet[str],
                    titles: t.FrozenSet[str] = frozenset(),
                    ) -> t.List[t.Tuple[int, int]]:
    if not text.strip():
        return [(0, len(text))]

    pairs: t.List[t.Tuple[int, int]] = []
    start = _skip_whitespace(text, 0)
    for match in BOUNDARY_PATTERN.finditer(text):
        end = match.end()
        if end <= start:
            continue

        if match.group().startswith('.'):
            token = _abbreviation_before(text[start:match.start() + 1])
            if token in titles:
                continue

            following = _skip_whitespace(text, end)
            if token in abbreviations and not (following < len(text) and text[following].isupper()):
                continue

        pairs.append((start, end))
        start = _skip_whitespace(text, end)

    end = len(text.rstrip())
    if start < end:
        pairs.append((start, end))

    return pairs


def _skip_whitespace(text: str, position: int) -> int:
    while position < len(text) and text[position].isspace():
        position += 1

    return position


def _abbreviation_before(fragment: str) -> t.Optional[str]:
    match = ABBREVIATION_PATTERN.search(fragment)
    return match.group(1).lower() if match else None


def _copy_offsets(text: str,
                  offsets: t.Sequence[t.Tuple[int, int]],
                  doc_id: str,
                  ) -> t.List[SentenceSpan]:
    if len(offsets) == 0:
        return [sentence_id_span(doc_id, 0, 0, len(text))]

    spans = []
    previous_end = 0
    for index, (start, end) in enumerate(offsets):
        if not 0 <= start <= end <= len(text):
            raise DataError(f'sentence offsets [{start}, {end}) of document "{doc_id}" are outside '
                            f'of the text of length {len(text)}')
        if start < previous_end:
            raise DataError(f'sentence offsets of document "{doc_id}" overlap or are not ascending '
                            f'at sentence {index}')

        spans.append(sentence_id_span(doc_id, index, start, end))
        previous_end = end

    return spans


# == INGESTION ==

def ingest_documents(source: t.Iterable[t.Tuple[str, str]],
                     segmenter: SegmenterConfig = SegmenterConfig(),
                     presegmented: t.Optional[t.Dict[str, t.List[t.Tuple[int, int]]]] = None,
                     name: str = 'collection',
                     logger: logging.Logger = NULL_LOGGER,
                     ) -> Collection:
    """
    Segments every (doc_id, text) record of the ``source`` stream into sentences and returns the
    resulting collection.

    :param source: An iterable of (doc_id, text) tuples
    :param segmenter: The segmenter configuration
    :param presegmented: For the "presegmented" segmenter mode, a dict mapping document ids to
        their list of (start, end) sentence offsets.
    :param name: The name of the collection, usually the dataset name
    :param logger: Receives a warning for every document with empty text

    :returns: Collection
    """
    documents: t.List[Document] = []
    seen: t.Set[str] = set()
    for doc_id, text in source:
        if doc_id in seen:
            raise DuplicateDocumentError(doc_id)
        seen.add(doc_id)

        if text == '':
            logger.warning(f'document "{doc_id}" has empty text, it is kept with a single empty sentence')

        offsets = None
        if segmenter.mode == 'presegmented':
            offsets = (presegmented or {}).get(doc_id)

        spans = segment_sentences(text, segmenter, doc_id=doc_id, offsets=offsets)
        documents.append(Document(doc_id, text, tuple(spans)))

    collection = Collection(documents, name=name)
    logger.info(f'ingested {collection.num_documents} documents with {collection.num_sentences} sentences')
    return collection


def read_text_directory(path: str) -> t.Iterator[t.Tuple[str, str]]:
    """
    Yields (doc_id, text) records for all the "<doc_id>.txt" files in the folder ``path``, sorted
    by file name.
    """
    for file_name in sorted(os.listdir(path)):
        if file_name.endswith('.txt'):
            with open(os.path.join(path, file_name), encoding='utf-8') as file:
                yield file_name[:-len('.txt')], file.read()


def read_jsonl_documents(path: str) -> t.Iterator[t.Tuple[str, str]]:
    """
    Yields (doc_id, text) records from a JSON-lines file of {"id": str, "text": str} objects.
    """
    for line_number, record in _read_jsonl(path):
        if 'id' not in record or 'text' not in record:
            raise DataError(f'{path}:{line_number}: document record needs the fields "id" and "text"')

        yield str(record['id']), record['text']


def read_presegmented(path: str) -> t.Dict[str, t.List[t.Tuple[int, int]]]:
    """
    Reads the JSON-lines file of {"id": str, "sentences": [{"start": int, "end": int}]} objects into
    a dict mapping document id to the list of sentence offsets.
    """
    result = {}
    for line_number, record in _read_jsonl(path):
        try:
            result[str(record['id'])] = [(int(s['start']), int(s['end'])) for s in record['sentences']]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f'{path}:{line_number}: invalid pre-segmented record ({exc})')

    return result


def read_documents(path: str) -> t.Iterator[t.Tuple[str, str]]:
    """
    Dispatches to the correct reader depending on whether ``path`` is a folder of text files or a
    JSON-lines file.
    """
    if os.path.isdir(path):
        return read_text_directory(path)

    return read_jsonl_documents(path)


def read_topics(path: str) -> t.Dict[str, str]:
    """
    Reads a JSON-lines file of {"topic": str, "statement": str} objects into a dict that maps the
    topic ids to the topic statements, in file order.
    """
    topics = {}
    for line_number, record in _read_jsonl(path):
        if 'topic' not in record or 'statement' not in record:
            raise DataError(f'{path}:{line_number}: topic record needs the fields "topic" and "statement"')

        topics[str(record['topic'])] = record['statement']

    return topics


def _read_jsonl(path: str) -> t.Iterator[t.Tuple[int, dict]]:
    with open(path, encoding='utf-8') as file:
        for line_number, line in enumerate(file, start=1):
            if not line.strip():
                continue

            try:
                yield line_number, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f'{path}:{line_number}: invalid JSON ({exc.msg})')


# == RELEVANCE JUDGMENTS ==

def load_qrels(path: str, granularity: str) -> QrelsMap:
    """
    Loads a TREC 4-column qrels file "topic ignored item_id grade". Grades greater than zero are
    relevant, zero is non-relevant. For the sentence granularity every item id has to be a sentence
    id of the form "<doc_id>#<index>", for the document granularity none of them may have that
    form.

    :param path: The path of the qrels file
    :param granularity: Either "document" or "sentence"

    :returns: QrelsMap
    """
    entries: t.Dict[str, t.Dict[str, bool]] = {}
    with open(path, encoding='utf-8') as file:
        for line_number, line in enumerate(file, start=1):
            if not line.strip():
                continue

            columns = line.split()
            if len(columns) != 4:
                raise QrelsFormatError(path, line_number, f'expected 4 columns but found {len(columns)}')

            topic_id, _, item_id, grade = columns
            try:
                grade = int(grade)
            except ValueError:
                raise QrelsFormatError(path, line_number, f'relevance grade "{grade}" is not an integer')

            is_sentence_id = SENTENCE_ID_PATTERN.match(item_id) is not None
            if granularity == SENTENCE and not is_sentence_id:
                raise QrelsFormatError(path, line_number, f'"{item_id}" is not a sentence id')
            if granularity == DOCUMENT and is_sentence_id:
                raise QrelsFormatError(path, line_number, f'"{item_id}" is a sentence id in document qrels')

            entries.setdefault(topic_id, {})[item_id] = grade > 0

    return QrelsMap(granularity, entries)


def load_passages(path: str) -> t.List[PassageJudgment]:
    """
    Loads passage judgments from the 4-column text format "topic doc_id start end".
    """
    passages = []
    with open(path, encoding='utf-8') as file:
        for line_number, line in enumerate(file, start=1):
            if not line.strip():
                continue

            columns = line.split()
            if len(columns) != 4:
                raise QrelsFormatError(path, line_number, f'expected 4 columns but found {len(columns)}')

            try:
                passages.append(PassageJudgment(columns[0], columns[1], int(columns[2]), int(columns[3])))
            except ValueError:
                raise QrelsFormatError(path, line_number, 'passage offsets are not integers')

    return passages


def derive_sentence_qrels_from_passages(passages: t.Iterable[PassageJudgment],
                                        collection: Collection,
                                        logger: logging.Logger = NULL_LOGGER,
                                        ) -> QrelsMap:
    """
    Labels a sentence relevant if its half-open span has a non-empty intersection with any relevant
    passage of the same topic and document. All other sentences of the documents that have at least
    one passage are labeled non-relevant. Passage offsets outside of the document are clamped.

    :param passages: The relevant passages
    :param collection: The segmented collection the passages refer to
    :param logger: Receives a warning for every clamped or empty passage

    :returns: QrelsMap at sentence granularity
    """
    grouped: t.Dict[t.Tuple[str, str], t.List[t.Tuple[int, int]]] = {}
    for passage in passages:
        if passage.doc_id not in collection:
            raise DataError(f'passage of topic "{passage.topic_id}" references the unknown document '
                            f'"{passage.doc_id}"')

        length = len(collection[passage.doc_id].text)
        start = min(max(passage.char_start, 0), length)
        end = min(max(passage.char_end, 0), length)
        if (start, end) != (passage.char_start, passage.char_end):
            logger.warning(f'passage [{passage.char_start}, {passage.char_end}) of topic "{passage.topic_id}" '
                           f'is outside of document "{passage.doc_id}" and was clamped to [{start}, {end})')

        grouped.setdefault((passage.topic_id, passage.doc_id), [])
        if start >= end:
            logger.warning(f'empty passage in document "{passage.doc_id}" for topic "{passage.topic_id}"')
            continue

        grouped[(passage.topic_id, passage.doc_id)].append((start, end))

    entries: t.Dict[str, t.Dict[str, bool]] = {}
    for (topic_id, doc_id), intervals in sorted(grouped.items()):
        labels = entries.setdefault(topic_id, {})
        for span in collection[doc_id].sentences:
            labels[span.sent_id] = any(overlaps(span.char_start, span.char_end, start, end)
                                       for start, end in intervals)

    return QrelsMap(SENTENCE, entries)


def overlaps(start_a: int, end_a: int, start_b: int, end_b: int) -> bool:
    """
    Whether the two half-open intervals [start_a, end_a) and [start_b, end_b) share at least one
    position.
    """
    return max(start_a, start_b) < min(end_a, end_b)


def propagate_nonrelevant(doc_qrels: QrelsMap,
                          collection: Collection,
                          sent_qrels: t.Optional[QrelsMap] = None,
                          ) -> QrelsMap:
    """
    Returns a copy of ``sent_qrels`` in which every sentence of a non-relevant or unjudged document
    carries the label non-relevant, for every topic of ``doc_qrels``. Existing sentence labels of
    relevant documents stay untouched.

    :raises InconsistentLabelsError: If a sentence inside a document that is not relevant is
        already labeled relevant.

    :returns: QrelsMap at sentence granularity
    """
    if doc_qrels.granularity != DOCUMENT:
        raise ValueError('propagate_nonrelevant expects document qrels')

    sent_qrels = sent_qrels or QrelsMap(SENTENCE)
    entries = {topic: dict(labels) for topic, labels in sent_qrels.entries.items()}

    for topic_id in sorted(set(doc_qrels.topics()) | set(sent_qrels.topics())):
        relevant = doc_qrels.relevant(topic_id)
        labels = entries.setdefault(topic_id, {})
        for document in collection:
            if document.doc_id in relevant:
                continue

            for span in document.sentences:
                if labels.get(span.sent_id, False):
                    raise InconsistentLabelsError(
                        f'sentence "{span.sent_id}" is labeled relevant for topic "{topic_id}" but its '
                        f'document is not relevant'
                    )
                labels[span.sent_id] = False

    return QrelsMap(SENTENCE, entries)


# == LABEL STATISTICS ==

@dataclass
class LabelStats:
    """
    Micro averaged statistics of the sentence labels within one group of topics. "Relevant
    documents" are counted once per (topic, document) pair.
    """
    name: str
    documents: int = 0
    sentences: int = 0
    relevant_documents: int = 0
    sentences_in_relevant: int = 0
    relevant_sentences_in_relevant: int = 0
    relevant_documents_with_relevant_sentence: int = 0
    first_position_sum: int = 0
    first_positions: Counter = field(default_factory=Counter)

    @property
    def sentences_per_document(self) -> float:
        return self.sentences / self.documents if self.documents else 0.0

    @property
    def sentences_per_relevant_document(self) -> float:
        return self.sentences_in_relevant / self.relevant_documents if self.relevant_documents else 0.0

    @property
    def relevant_sentences_per_relevant_document(self) -> float:
        if not self.relevant_documents:
            return 0.0

        return self.relevant_sentences_in_relevant / self.relevant_documents

    @property
    def first_relevant_position(self) -> float:
        """
        Mean 1-based position of the first relevant sentence, over the relevant documents that contain
        at least one relevant sentence.
        """
        if not self.relevant_documents_with_relevant_sentence:
            return 0.0

        return self.first_position_sum / self.relevant_documents_with_relevant_sentence

    @property
    def fraction_with_relevant_sentence(self) -> float:
        if not self.relevant_documents:
            return 0.0

        return self.relevant_documents_with_relevant_sentence / self.relevant_documents

    def merge(self, other: 'LabelStats') -> None:
        self.relevant_documents += other.relevant_documents
        self.sentences_in_relevant += other.sentences_in_relevant
        self.relevant_sentences_in_relevant += other.relevant_sentences_in_relevant
        self.relevant_documents_with_relevant_sentence += other.relevant_documents_with_relevant_sentence
        self.first_position_sum += other.first_position_sum
        self.first_positions.update(other.first_positions)

    def to_row(self) -> t.Dict[str, object]:
        return {
            'name': self.name,
            'sentences_per_document': self.sentences_per_document,
            'sentences_per_relevant_document': self.sentences_per_relevant_document,
            'relevant_sentences_per_relevant_document': self.relevant_sentences_per_relevant_document,
            'first_relevant_position': self.first_relevant_position,
            'fraction_with_relevant_sentence': self.fraction_with_relevant_sentence,
        }


@dataclass
class LabelStatsReport:
    overall: LabelStats
    topics: t.Dict[str, LabelStats]

    def rows(self) -> t.List[t.Dict[str, object]]:
        return [stats.to_row() for stats in self.topics.values()] + [self.overall.to_row()]


def first_relevant_position(labels: t.Sequence[bool]) -> t.Optional[int]:
    """
    Returns the 1-based position of the first True value in ``labels`` or None if there is none.
    """
    for position, label in enumerate(labels, start=1):
        if label:
            return position

    return None


def corpus_stats(collection: Collection,
                 doc_qrels: QrelsMap,
                 sent_qrels: QrelsMap,
                 ) -> LabelStatsReport:
    """
    Computes the sentence label statistics of a collection for every topic of ``doc_qrels`` and the
    micro average over all topics, including the histogram of the position of the first relevant
    sentence in the relevant documents.

    :returns: LabelStatsReport
    """
    overall = LabelStats(
        name=collection.name,
        documents=collection.num_documents,
        sentences=collection.num_sentences,
    )
    topics: t.Dict[str, LabelStats] = {}
    for topic_id in doc_qrels.topics():
        stats = LabelStats(
            name=topic_id,
            documents=collection.num_documents,
            sentences=collection.num_sentences,
        )
        for doc_id in sorted(doc_qrels.relevant(topic_id)):
            if doc_id not in collection:
                continue

            document = collection[doc_id]
            labels = [sent_qrels.label(topic_id, span.sent_id) for span in document.sentences]
            stats.relevant_documents += 1
            stats.sentences_in_relevant += len(labels)
            stats.relevant_sentences_in_relevant += sum(labels)

            position = first_relevant_position(labels)
            if position is not None:
                stats.relevant_documents_with_relevant_sentence += 1
                stats.first_position_sum += position
                stats.first_positions[position] += 1

        topics[topic_id] = stats
        overall.merge(stats)

    return LabelStatsReport(overall=overall, topics=topics)
