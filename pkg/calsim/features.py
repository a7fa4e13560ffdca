"""
Word features over the union of documents and sentences.

Every union item is represented by a tf-idf vector where the weight of a term is

    w = (1 + ln(tf)) * ln(N / df)

with ``tf`` the number of occurrences of the term in the item, ``N`` the number of union items and
``df`` the number of union items that contain the term. The base of the logarithm only rescales all
weights by the same factor and is therefore irrelevant after the L2 normalization.
"""
import re
import math
import functools
import typing as t
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from nltk.stem.porter import PorterStemmer

from calsim.corpus import Collection
from calsim.corpus import DOCUMENT
from calsim.corpus import SENTENCE
from calsim.corpus import UnionItem
from calsim.utils import StoreError

TOKEN_PATTERN = re.compile(r'[^\W_]+')

STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@functools.lru_cache(maxsize=2 ** 18)
def stem(word: str) -> str:
    return STEMMER.stem(word, to_lowercase=False)


def tokenize(text: str) -> t.List[str]:
    """
    Splits the ``text`` into maximal runs of unicode letters and digits, lower cases them and reduces
    them to their Porter stem.

    .. code-block:: python

        tokenize('Running runners RUN')  # ['run', 'runner', 'run']

    :returns: A list of token strings
    """
    return [stem(word) for word in TOKEN_PATTERN.findall(text.lower())]


def term_weight(tf: int, df: int, num_items: int) -> float:
    return (1.0 + math.log(tf)) * math.log(num_items / df)


# == SPARSE VECTORS ==

@dataclass(frozen=True)
class SparseVector:
    """
    A sparse real vector as two parallel arrays of strictly ascending term ids and their weights.
    """
    indices: np.ndarray
    values: np.ndarray
    normalized: bool = False

    @classmethod
    def empty(cls) -> 'SparseVector':
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64))

    @classmethod
    def from_dict(cls, weights: t.Dict[int, float], normalized: bool = False) -> 'SparseVector':
        keys = sorted(weights)
        return cls(
            np.array(keys, dtype=np.int64),
            np.array([weights[key] for key in keys], dtype=np.float64),
            normalized,
        )

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented

        return (np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values)
                and self.normalized == other.normalized)

    def to_dict(self) -> t.Dict[int, float]:
        return {int(index): float(value) for index, value in zip(self.indices, self.values)}

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def dot(self, weights: np.ndarray) -> float:
        """
        The dot product with the dense array ``weights`` of vocabulary length.
        """
        return float(np.dot(weights[self.indices], self.values))

    def normalize(self) -> 'SparseVector':
        norm = self.norm()
        if norm == 0.0:
            return SparseVector(self.indices, self.values, True)

        return SparseVector(self.indices, self.values / norm, True)

    def to_dense(self, size: int) -> np.ndarray:
        dense = np.zeros(size, dtype=np.float64)
        dense[self.indices] = self.values
        return dense


# == VOCABULARY ==

class Vocabulary:
    """
    The mapping of the retained terms to dense integer term ids together with the document frequency
    of every term and the number ``num_items`` of union items the frequencies were counted on.

    Term ids are assigned in alphabetical order of the terms so that the same collection always
    produces the same ids.
    """
    def __init__(self,
                 terms: t.Sequence[str],
                 df: t.Sequence[int],
                 num_items: int):
        self.terms: t.List[str] = list(terms)
        self.df = np.array(df, dtype=np.int64)
        self.num_items = num_items
        self.term_ids: t.Dict[str, int] = {term: index for index, term in enumerate(self.terms)}

        if len(self.terms) != len(self.df):
            raise ValueError('vocabulary terms and document frequencies differ in length')

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.term_ids

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented

        return (self.terms == other.terms
                and np.array_equal(self.df, other.df)
                and self.num_items == other.num_items)

    def term_id(self, term: str) -> t.Optional[int]:
        return self.term_ids.get(term)

    def idf(self) -> np.ndarray:
        """
        Returns the array ln(N / df) for all term ids.
        """
        if len(self) == 0:
            return np.zeros(0, dtype=np.float64)

        return np.log(self.num_items / self.df)

    def write(self, path: str) -> None:
        """
        Writes the vocabulary as a TSV file with the header line "N <count>" followed by one line
        "term term_id df" per term, ordered by term id.
        """
        with open(path, mode='w', encoding='utf-8') as file:
            file.write(f'N\t{self.num_items}\n')
            for index, term in enumerate(self.terms):
                file.write(f'{term}\t{index}\t{self.df[index]}\n')

    @classmethod
    def read(cls, path: str) -> 'Vocabulary':
        with open(path, encoding='utf-8') as file:
            header = file.readline().rstrip('\n').split('\t')
            if len(header) != 2 or header[0] != 'N':
                raise StoreError(f'{path}:1: vocabulary header must have the form "N <count>"')

            try:
                num_items = int(header[1])
            except ValueError:
                raise StoreError(f'{path}:1: document count "{header[1]}" is not an integer')

            terms, df = [], []
            for line_number, line in enumerate(file, start=2):
                columns = line.rstrip('\n').split('\t')
                if len(columns) != 3:
                    raise StoreError(f'{path}:{line_number}: invalid vocabulary entry')

                try:
                    term_id, frequency = int(columns[1]), int(columns[2])
                except ValueError:
                    raise StoreError(f'{path}:{line_number}: term id and document frequency have to be integers')

                if term_id != len(terms):
                    raise StoreError(f'{path}:{line_number}: invalid vocabulary entry')

                terms.append(columns[0])
                df.append(frequency)

        return cls(terms, df, num_items)


def build_vocabulary(token_lists: t.Iterable[t.Sequence[str]], min_count: int = 2) -> Vocabulary:
    """
    Builds the vocabulary from the token lists of *all* union items (documents and sentences).
    A term is retained if its total number of occurrences over all items is at least
    ``min_count``. The document frequency of a term is the number of items containing it.

    :param token_lists: One token list per union item
    :param min_count: The minimum total number of occurrences of a retained term

    :returns: Vocabulary
    """
    occurrences: Counter = Counter()
    frequencies: Counter = Counter()
    num_items = 0
    for tokens in token_lists:
        num_items += 1
        occurrences.update(tokens)
        frequencies.update(set(tokens))

    terms = sorted(term for term, count in occurrences.items() if count >= min_count)
    return Vocabulary(terms, [frequencies[term] for term in terms], num_items)


def vectorize(text: t.Union[str, t.Sequence[str]],
              vocabulary: Vocabulary,
              normalize: bool = True,
              ) -> SparseVector:
    """
    Computes the tf-idf vector of the given ``text`` (or of an already tokenized list of tokens)
    over the fixed ``vocabulary``. Terms that are not part of the vocabulary are dropped. Text that
    is not part of the collection, such as the topic statement, does not change N or df.

    :param text: The raw text or its token list
    :param vocabulary: The vocabulary holding term ids, df and N
    :param normalize: Whether to scale the vector to unit L2 norm

    :returns: SparseVector
    """
    tokens = tokenize(text) if isinstance(text, str) else text
    counts = Counter(vocabulary.term_ids[token] for token in tokens if token in vocabulary.term_ids)

    weights = {
        term_id: term_weight(tf, int(vocabulary.df[term_id]), vocabulary.num_items)
        for term_id, tf in counts.items()
    }
    vector = SparseVector.from_dict(weights)
    if normalize:
        vector = vector.normalize()

    return vector


# == FEATURE SPACE ==

class FeatureSpace:
    """
    The feature vectors of all union items of a collection as the rows of one CSR matrix.

    Rows follow the union order: every document row is immediately followed by the rows of its
    sentences. Besides the matrix, the space keeps the item ids, the kind and the parent document of
    every row as well as the mapping of every document to its own row and its sentence rows, which
    is what the selection step of the engine needs.

    :param matrix: The (num_items, num_terms) CSR matrix of normalized tf-idf rows
    :param items: The UnionItem of every row
    """
    def __init__(self, matrix: sp.csr_matrix, items: t.Sequence[UnionItem]):
        if matrix.shape[0] != len(items):
            raise ValueError(f'feature matrix has {matrix.shape[0]} rows for {len(items)} items')

        self.matrix = matrix.tocsr()
        self.items: t.List[UnionItem] = list(items)
        self.item_ids: t.List[str] = [item.item_id for item in self.items]
        self.row_of: t.Dict[str, int] = {item_id: row for row, item_id in enumerate(self.item_ids)}

        self.is_document = np.array([item.kind == DOCUMENT for item in self.items], dtype=bool)
        self.document_rows = np.flatnonzero(self.is_document)
        self.sentence_rows = np.flatnonzero(~self.is_document)

        # For every row the position of its parent document in "document_rows". Sentence rows of a
        # document are a contiguous range directly after the document row.
        self.parent_index = np.cumsum(self.is_document) - 1
        self.doc_ids: t.List[str] = [self.item_ids[row] for row in self.document_rows]
        self.doc_index: t.Dict[str, int] = {doc_id: index for index, doc_id in enumerate(self.doc_ids)}
        self.sentence_ranges: t.List[t.Tuple[int, int]] = []
        ends = list(self.document_rows[1:]) + [len(self.items)]
        for start, end in zip(self.document_rows, ends):
            self.sentence_ranges.append((int(start) + 1, int(end)))

        # Rank of each item id in ascending string order, used to break score ties.
        order = sorted(range(len(self.item_ids)), key=self.item_ids.__getitem__)
        self.id_rank = np.empty(len(self.item_ids), dtype=np.int64)
        self.id_rank[order] = np.arange(len(self.item_ids))

    def __len__(self) -> int:
        return len(self.items)

    @property
    def num_terms(self) -> int:
        return self.matrix.shape[1]

    def rows_of_kind(self, kind: str) -> np.ndarray:
        if kind == DOCUMENT:
            return self.document_rows
        elif kind == SENTENCE:
            return self.sentence_rows

        raise ValueError(f'unknown item kind "{kind}"')

    def vector(self, row: int) -> SparseVector:
        start, end = self.matrix.indptr[row], self.matrix.indptr[row + 1]
        return SparseVector(
            self.matrix.indices[start:end].astype(np.int64),
            self.matrix.data[start:end].astype(np.float64),
            True,
        )

    def vector_of(self, item_id: str) -> SparseVector:
        return self.vector(self.row_of[item_id])

    def sentence_rows_of(self, doc_id: str) -> range:
        start, end = self.sentence_ranges[self.doc_index[doc_id]]
        return range(start, end)

    def parent_row(self, row: int) -> int:
        return int(self.document_rows[self.parent_index[row]])

    def parent_of_row(self, row: int) -> str:
        return self.items[row].parent_doc

    @classmethod
    def build(cls,
              collection: Collection,
              vocabulary: t.Optional[Vocabulary] = None,
              ) -> t.Tuple[Vocabulary, 'FeatureSpace']:
        """
        Tokenizes every union item of the ``collection`` once, builds the vocabulary from the token
        lists (unless one is given) and vectorizes all items.

        :returns: A tuple (vocabulary, feature space)
        """
        items: t.List[UnionItem] = []
        token_lists: t.List[t.List[str]] = []
        for item, text in collection.union_items():
            items.append(item)
            token_lists.append(tokenize(text))

        if vocabulary is None:
            vocabulary = build_vocabulary(token_lists)

        indptr = [0]
        indices: t.List[np.ndarray] = []
        data: t.List[np.ndarray] = []
        for tokens in token_lists:
            vector = vectorize(tokens, vocabulary, normalize=True)
            indices.append(vector.indices)
            data.append(vector.values)
            indptr.append(indptr[-1] + len(vector))

        matrix = sp.csr_matrix(
            (
                np.concatenate(data) if data else np.zeros(0),
                np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
                np.array(indptr, dtype=np.int64),
            ),
            shape=(len(items), len(vocabulary)),
        )
        return vocabulary, cls(matrix, items)
