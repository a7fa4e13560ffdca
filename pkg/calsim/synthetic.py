"""
Generator of synthetic test collections with planted topical vocabulary.

Every topic owns a small set of topic words. A document that is relevant to a topic contains a
number of relevant sentences, which mix topic words into the background vocabulary, starting at a
random position so that a reviewer reading from the top has to read a couple of sentences before
reaching the first relevant one. Some non-relevant documents contain scattered topic words as
distractors. Sentence labels follow the planting, document labels follow the topic assignment.
"""
import os
import json
import typing as t
from dataclasses import dataclass, field

import numpy as np

from calsim.corpus import QrelsMap
from calsim.corpus import DOCUMENT
from calsim.corpus import SENTENCE
from calsim.corpus import sentence_id

CONSONANTS = 'bdfgklmnprtvz'
VOWELS = 'aiou'


@dataclass(frozen=True)
class SyntheticSettings:
    """
    :param num_documents: The number of documents of the collection
    :param num_topics: The number of topics
    :param relevant_fraction: The fraction of the documents that is relevant for each topic
    :param min_sentences: The minimum number of sentences per document
    :param max_sentences: The maximum number of sentences per document
    :param sentence_length: The (min, max) number of words of a sentence
    :param background_size: The number of background words shared by all topics
    :param topic_vocabulary: The number of words owned by each topic
    :param topic_words_per_sentence: The (min, max) number of topic words in a relevant sentence
    :param first_position_p: The success probability of the geometric distribution of the position
        of the first relevant sentence. The mean position is roughly 1 / p.
    :param extra_relevant_probability: The chance of every sentence after the first relevant one to
        be relevant as well
    :param no_sentence_fraction: The fraction of relevant documents without any relevant sentence
    :param distractor_fraction: The fraction of the documents that contains a single sentence with
        one or two topic words of a topic they are not relevant to
    :param seed: The seed of the generator
    """
    num_documents: int = 2000
    num_topics: int = 10
    relevant_fraction: float = 0.1
    min_sentences: int = 4
    max_sentences: int = 12
    sentence_length: t.Tuple[int, int] = (8, 16)
    background_size: int = 3000
    topic_vocabulary: int = 25
    topic_words_per_sentence: t.Tuple[int, int] = (2, 5)
    first_position_p: float = 0.4
    extra_relevant_probability: float = 0.3
    no_sentence_fraction: float = 0.02
    distractor_fraction: float = 0.05
    seed: int = 1


@dataclass
class SyntheticCorpus:
    documents: t.List[t.Tuple[str, str]]
    topics: t.Dict[str, str]
    doc_qrels: QrelsMap
    sent_qrels: QrelsMap
    first_positions: t.List[int] = field(default_factory=list)

    @property
    def mean_first_position(self) -> float:
        return float(np.mean(self.first_positions)) if self.first_positions else 0.0

    def write(self, path: str) -> t.Dict[str, str]:
        """
        Writes the collection into the folder ``path`` in the input formats of the "prepare" and
        "run" commands.

        :returns: A dict that maps the kind of file to its path
        """
        os.makedirs(path, exist_ok=True)
        paths = {
            'documents': os.path.join(path, 'docs.jsonl'),
            'topics': os.path.join(path, 'topics.jsonl'),
            'doc_qrels': os.path.join(path, 'qrels.doc.txt'),
            'sent_qrels': os.path.join(path, 'qrels.sent.txt'),
        }
        with open(paths['documents'], mode='w') as file:
            for doc_id, text in self.documents:
                file.write(json.dumps({'id': doc_id, 'text': text}) + '\n')

        with open(paths['topics'], mode='w') as file:
            for topic_id, statement in self.topics.items():
                file.write(json.dumps({'topic': topic_id, 'statement': statement}) + '\n')

        self.doc_qrels.write(paths['doc_qrels'])
        self.sent_qrels.write(paths['sent_qrels'])
        return paths


def make_words(rng: np.random.Generator, count: int, exclude: t.Set[str] = frozenset()) -> t.List[str]:
    """
    Creates ``count`` distinct pronounceable words out of two to four consonant-vowel syllables.
    The words end in a vowel other than "e", which the stemmer leaves untouched.
    """
    words: t.List[str] = []
    seen = set(exclude)
    while len(words) < count:
        syllables = rng.integers(2, 5)
        word = ''.join(CONSONANTS[rng.integers(len(CONSONANTS))] + VOWELS[rng.integers(len(VOWELS))]
                       for _ in range(syllables))
        if word not in seen:
            seen.add(word)
            words.append(word)

    return words


def _sentence(words: t.List[str]) -> str:
    return ' '.join([words[0].capitalize()] + words[1:]) + '.'


def generate_corpus(settings: SyntheticSettings = SyntheticSettings()) -> SyntheticCorpus:
    """
    Generates a synthetic collection with topics and document and sentence labels. The same settings
    always produce the same collection.

    :returns: SyntheticCorpus
    """
    rng = np.random.Generator(np.random.PCG64(settings.seed))
    background = make_words(rng, settings.background_size)
    topic_words: t.Dict[str, t.List[str]] = {}
    used = set(background)
    for index in range(settings.num_topics):
        words = make_words(rng, settings.topic_vocabulary, exclude=used)
        used.update(words)
        topic_words[f'T{index + 1:02d}'] = words

    doc_ids = [f'D{index + 1:05d}' for index in range(settings.num_documents)]
    num_relevant = max(1, int(round(settings.relevant_fraction * settings.num_documents)))
    relevant_for: t.Dict[str, t.Set[int]] = {
        topic: set(int(i) for i in rng.choice(settings.num_documents, size=num_relevant, replace=False))
        for topic in topic_words
    }

    doc_entries: t.Dict[str, t.Dict[str, bool]] = {topic: {} for topic in topic_words}
    sent_entries: t.Dict[str, t.Dict[str, bool]] = {topic: {} for topic in topic_words}
    documents: t.List[t.Tuple[str, str]] = []
    first_positions: t.List[int] = []

    low, high = settings.sentence_length
    for index, doc_id in enumerate(doc_ids):
        num_sentences = int(rng.integers(settings.min_sentences, settings.max_sentences + 1))
        sentences = [list(rng.choice(background, size=int(rng.integers(low, high + 1))))
                     for _ in range(num_sentences)]

        for topic, words in topic_words.items():
            if index in relevant_for[topic]:
                doc_entries[topic][doc_id] = True
                labels = [False] * num_sentences
                if rng.random() >= settings.no_sentence_fraction:
                    first = min(int(rng.geometric(settings.first_position_p)), num_sentences) - 1
                    labels[first] = True
                    for position in range(first + 1, num_sentences):
                        labels[position] = bool(rng.random() < settings.extra_relevant_probability)
                    first_positions.append(first + 1)

                for position, relevant in enumerate(labels):
                    if relevant:
                        count = int(rng.integers(settings.topic_words_per_sentence[0],
                                                 settings.topic_words_per_sentence[1] + 1))
                        _plant(rng, sentences[position], list(rng.choice(words, size=count)))
                    sent_entries[topic][sentence_id(doc_id, position)] = relevant

            elif rng.random() < settings.distractor_fraction:
                position = int(rng.integers(num_sentences))
                _plant(rng, sentences[position], list(rng.choice(words, size=int(rng.integers(1, 3)))))

        documents.append((doc_id, ' '.join(_sentence(words) for words in sentences)))

    topics = {
        topic: 'Documents about ' + ' '.join(words[:6]) + '.'
        for topic, words in topic_words.items()
    }
    return SyntheticCorpus(
        documents=documents,
        topics=topics,
        doc_qrels=QrelsMap(DOCUMENT, doc_entries),
        sent_qrels=QrelsMap(SENTENCE, sent_entries),
        first_positions=first_positions,
    )


def _plant(rng: np.random.Generator, sentence: t.List[str], words: t.List[str]) -> None:
    for word in words:
        sentence.insert(int(rng.integers(len(sentence) + 1)), str(word))
