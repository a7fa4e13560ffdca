import os
import math
import tempfile

import numpy as np
import pytest

from calsim.corpus import ingest_documents
from calsim.corpus import read_documents
from calsim.corpus import DOCUMENT, SENTENCE
from calsim.features import tokenize
from calsim.features import term_weight
from calsim.features import build_vocabulary
from calsim.features import vectorize
from calsim.features import SparseVector
from calsim.features import Vocabulary
from calsim.features import FeatureSpace
from calsim.utils import StoreError

from .util import ASSETS_PATH


class TestTokenize:

    def test_porter_stemming(self):
        assert tokenize('Running runners RUN') == ['run', 'runner', 'run']
        assert tokenize('caresses ponies') == ['caress', 'poni']

    def test_empty_text(self):
        assert tokenize('') == []
        assert tokenize('  ,.;  ') == []

    def test_split_on_non_alphanumerics(self):
        assert tokenize('cat_dog-bird 42x') == ['cat', 'dog', 'bird', '42x']


class TestTermWeight:

    def test_known_values(self):
        assert term_weight(1, 10, 1000) == pytest.approx(4.6052, abs=1e-4)
        assert term_weight(3, 2, 4) == pytest.approx(1.4547, abs=1e-4)

    def test_term_in_every_item_has_zero_weight(self):
        assert term_weight(5, 7, 7) == 0.0

    def test_monotonicity(self):
        weights_tf = [term_weight(tf, 5, 100) for tf in range(1, 20)]
        assert all(a < b for a, b in zip(weights_tf, weights_tf[1:]))

        weights_df = [term_weight(2, df, 100) for df in range(1, 100)]
        assert all(a > b for a, b in zip(weights_df, weights_df[1:]))


class TestVocabulary:

    def test_single_occurrence_is_excluded(self):
        vocabulary = build_vocabulary([['a', 'b'], ['a', 'c', 'c']])
        assert vocabulary.terms == ['a', 'c']
        # "c" occurs twice but only in one item
        assert list(vocabulary.df) == [2, 1]
        assert vocabulary.num_items == 2

    def test_document_and_its_sentence(self):
        vocabulary = build_vocabulary([['rare', 'x'], ['rare']])
        assert 'rare' in vocabulary
        assert vocabulary.df[vocabulary.term_id('rare')] == 2

    def test_empty_collection(self):
        vocabulary = build_vocabulary([])
        assert len(vocabulary) == 0
        assert vocabulary.num_items == 0
        assert len(vocabulary.idf()) == 0

    def test_term_ids_are_alphabetical(self):
        vocabulary = build_vocabulary([['zeta', 'alpha', 'mid'], ['mid', 'alpha', 'zeta']])
        assert vocabulary.terms == ['alpha', 'mid', 'zeta']
        assert vocabulary.term_id('zeta') == 2
        assert vocabulary.term_id('missing') is None

    def test_write_and_read(self):
        vocabulary = build_vocabulary([['a', 'b', 'b'], ['a', 'c'], ['c', 'd']])
        with tempfile.TemporaryDirectory() as path:
            file_path = os.path.join(path, 'vocabulary.tsv')
            vocabulary.write(file_path)
            with open(file_path) as file:
                assert file.readline() == 'N\t3\n'

            assert Vocabulary.read(file_path) == vocabulary

    def test_read_rejects_broken_file(self):
        with tempfile.TemporaryDirectory() as path:
            file_path = os.path.join(path, 'vocabulary.tsv')
            with open(file_path, mode='w') as file:
                file.write('terms\t3\n')

            with pytest.raises(StoreError):
                Vocabulary.read(file_path)

    @pytest.mark.parametrize('content', [
        'N\t3\na\t0\tmany\n',
        'N\t3\na\tzero\t2\n',
        'N\tthree\na\t0\t2\n',
    ])
    def test_read_rejects_non_integer_fields(self, content):
        with tempfile.TemporaryDirectory() as path:
            file_path = os.path.join(path, 'vocabulary.tsv')
            with open(file_path, mode='w') as file:
                file.write(content)

            with pytest.raises(StoreError, match='vocabulary.tsv'):
                Vocabulary.read(file_path)


class TestVectorize:

    def test_weights_before_normalization(self):
        vocabulary = Vocabulary(['a', 'b', 'c'], [10, 2, 4], num_items=1000)
        vector = vectorize(['a', 'b', 'b', 'b', 'unknown'], vocabulary, normalize=False)
        assert list(vector.indices) == [0, 1]
        assert vector.values[0] == pytest.approx(math.log(100))
        assert vector.values[1] == pytest.approx((1 + math.log(3)) * math.log(500))
        assert not vector.normalized

    def test_normalized_vector_has_unit_norm(self):
        vocabulary = Vocabulary(['a', 'b', 'c'], [10, 2, 4], num_items=1000)
        vector = vectorize(['a', 'c', 'c'], vocabulary)
        assert vector.normalized
        assert vector.norm() == pytest.approx(1.0, abs=1e-9)

    def test_zero_vector_stays_zero(self):
        vocabulary = Vocabulary(['a'], [4], num_items=4)
        vector = vectorize(['a'], vocabulary)
        assert vector.norm() == 0.0
        assert vectorize(['nothing'], vocabulary) == SparseVector(
            np.zeros(0, dtype=np.int64), np.zeros(0), True
        )

    def test_deterministic(self):
        vocabulary = Vocabulary(['cat', 'mat'], [2, 3], num_items=10)
        assert vectorize('The cat sat on the mat', vocabulary) == vectorize('The cat sat on the mat', vocabulary)

    def test_sparse_vector_helpers(self):
        vector = SparseVector.from_dict({3: 2.0, 1: 1.0})
        assert list(vector.indices) == [1, 3]
        assert vector.to_dict() == {1: 1.0, 3: 2.0}
        assert vector.dot(np.array([0.0, 2.0, 0.0, 0.5])) == pytest.approx(3.0)
        assert list(vector.to_dense(4)) == [0.0, 1.0, 0.0, 2.0]
        assert len(SparseVector.empty()) == 0


class TestFeatureSpace:

    @pytest.fixture
    def built(self):
        collection = ingest_documents(read_documents(os.path.join(ASSETS_PATH, 'docs.jsonl')))
        return collection, *FeatureSpace.build(collection)

    def test_layout(self, built):
        collection, vocabulary, space = built
        assert len(space) == collection.num_union_items == 10
        assert space.num_terms == len(vocabulary)
        assert vocabulary.num_items == 10
        assert space.doc_ids == ['d1', 'd2', 'd3']
        assert list(space.rows_of_kind(DOCUMENT)) == [0, 4, 7]
        assert len(space.rows_of_kind(SENTENCE)) == 7
        assert list(space.sentence_rows_of('d2')) == [5, 6]
        assert space.parent_row(6) == 4
        assert space.parent_of_row(9) == 'd3'

    def test_rows_are_normalized(self, built):
        _, _, space = built
        norms = [space.vector(row).norm() for row in range(len(space))]
        assert all(norm == pytest.approx(1.0, abs=1e-9) or norm == 0.0 for norm in norms)

    def test_document_terms_are_union_of_sentence_terms(self, built):
        collection, vocabulary, space = built
        for document in collection:
            doc_terms = set(space.vector_of(document.doc_id).indices)
            sentence_terms = set()
            for span in document.sentences:
                sentence_terms.update(space.vector_of(span.sent_id).indices)

            assert doc_terms == sentence_terms

    def test_id_rank_orders_ids(self, built):
        _, _, space = built
        ordered = sorted(range(len(space)), key=lambda row: space.id_rank[row])
        assert [space.item_ids[row] for row in ordered] == sorted(space.item_ids)

    def test_fixed_vocabulary_is_reused(self, built):
        collection, vocabulary, space = built
        vocabulary_2, space_2 = FeatureSpace.build(collection, vocabulary)
        assert vocabulary_2 is vocabulary
        assert (space_2.matrix != space.matrix).nnz == 0
