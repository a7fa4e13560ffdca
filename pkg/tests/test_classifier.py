import math

import numpy as np
import pytest
import scipy.sparse as sp

from calsim.features import SparseVector
from calsim.classifier import RELEVANT, NON_RELEVANT
from calsim.classifier import TrainParams
from calsim.classifier import LabeledExample
from calsim.classifier import zero_model
from calsim.classifier import logistic_loss
from calsim.classifier import logistic_gradient
from calsim.classifier import train
from calsim.classifier import score
from calsim.classifier import score_all
from calsim.classifier import auc
from calsim.utils import TrainingError

from .util import LOG


def random_vector(rng: np.random.Generator, num_terms: int, density: float = 0.3) -> SparseVector:
    mask = rng.random(num_terms) < density
    mask[rng.integers(num_terms)] = True
    indices = np.flatnonzero(mask)
    return SparseVector(indices, rng.random(len(indices)) + 0.1).normalize()


def random_examples(seed: int, num_terms: int = 30, count: int = 20):
    rng = np.random.default_rng(seed)
    examples = []
    for index in range(count):
        label = RELEVANT if index % 2 == 0 else NON_RELEVANT
        examples.append(LabeledExample(random_vector(rng, num_terms), label))

    return examples


def test_train_params_validation():
    with pytest.raises(ValueError):
        TrainParams(lam=0.0)

    with pytest.raises(ValueError):
        TrainParams(iterations=0)

    assert TrainParams(lam=1e-4).radius == pytest.approx(100.0)


def test_labeled_example_validation():
    with pytest.raises(ValueError):
        LabeledExample(SparseVector.empty(), 0)


class TestLoss:

    def test_gradient_matches_finite_differences(self):
        """
        The analytic gradient of the logistic loss agrees with central finite differences on a
        thousand random weight and difference vectors.
        """
        rng = np.random.default_rng(42)
        h = 1e-6
        for _ in range(1000):
            weights = rng.normal(size=8)
            difference = rng.normal(size=8)
            analytic = logistic_gradient(weights, difference)
            numeric = np.zeros(8)
            for index in range(8):
                step = np.zeros(8)
                step[index] = h
                numeric[index] = (logistic_loss(weights + step, difference)
                                  - logistic_loss(weights - step, difference)) / (2 * h)

            error = np.linalg.norm(numeric - analytic) / max(np.linalg.norm(analytic), 1e-8)
            assert error < 1e-4

    @pytest.mark.parametrize('lam', [1.0, 0.1, 1e-3])
    def test_update_follows_the_logistic_gradient(self, lam):
        """
        The scaled sparse updates of ``train`` give the same weights as the plain dense Pegasos
        update with the logistic gradient, w <- (1 - 1/t) w - eta * grad, followed by the projection
        onto the ball of radius 1/sqrt(lambda).
        """
        examples = random_examples(4, num_terms=12, count=10)
        params = TrainParams(lam=lam, iterations=60, seed=7)
        model = train(examples, params, num_terms=12)

        positives = [e.vector.to_dense(12) for e in examples if e.label == RELEVANT]
        negatives = [e.vector.to_dense(12) for e in examples if e.label == NON_RELEVANT]
        rng = np.random.Generator(np.random.PCG64(params.seed))
        positive_draws = rng.integers(0, len(positives), size=params.iterations)
        negative_draws = rng.integers(0, len(negatives), size=params.iterations)

        weights = np.zeros(12)
        for step in range(1, params.iterations + 1):
            difference = positives[positive_draws[step - 1]] - negatives[negative_draws[step - 1]]
            eta = 1.0 / (lam * step)
            weights = (1 - 1 / step) * weights - eta * logistic_gradient(weights, difference)
            norm = np.linalg.norm(weights)
            if norm > params.radius:
                weights *= params.radius / norm

        assert np.allclose(model.weights, weights, rtol=1e-8, atol=1e-10)

    def test_loss_values(self):
        assert logistic_loss(np.zeros(3), np.ones(3)) == pytest.approx(math.log(2))
        # large margins neither overflow nor lose the sign
        assert logistic_loss(np.array([1000.0]), np.array([1.0])) == pytest.approx(0.0)
        assert logistic_loss(np.array([-1000.0]), np.array([1.0])) == pytest.approx(1000.0)


class TestTrain:

    def test_needs_both_labels(self):
        positive = LabeledExample(SparseVector.from_dict({0: 1.0}), RELEVANT)
        with pytest.raises(TrainingError):
            train([positive], TrainParams(iterations=10))

        with pytest.raises(TrainingError):
            train([], TrainParams(iterations=10))

    def test_separable_pair(self):
        positive = SparseVector.from_dict({0: 1.0})
        negative = SparseVector.from_dict({1: 1.0})
        model = train(
            [LabeledExample(positive, RELEVANT), LabeledExample(negative, NON_RELEVANT)],
            TrainParams(iterations=2000),
        )
        assert score(model, positive) > score(model, negative)
        assert model.steps == 2000

    def test_single_iteration_is_projected(self):
        """
        The first update puts the full step of length 1/lambda * 0.5 * |d| onto the weights, which
        is far outside the ball and has to be projected onto its surface.
        """
        positive = SparseVector.from_dict({0: 1.0})
        negative = SparseVector.from_dict({1: 1.0})
        params = TrainParams(lam=1e-4, iterations=1)
        model = train([LabeledExample(positive, RELEVANT), LabeledExample(negative, NON_RELEVANT)], params)

        assert model.steps == 1
        assert model.norm() == pytest.approx(params.radius)
        assert model.weights[0] == pytest.approx(-model.weights[1])
        assert model.weights[0] > 0

    def test_label_flip_negates_weights(self):
        a = SparseVector.from_dict({0: 0.6, 1: 0.8})
        b = SparseVector.from_dict({2: 1.0})
        params = TrainParams(iterations=500, seed=3)
        model = train([LabeledExample(a, RELEVANT), LabeledExample(b, NON_RELEVANT)], params)
        flipped = train([LabeledExample(a, NON_RELEVANT), LabeledExample(b, RELEVANT)], params)
        assert np.allclose(model.weights, -flipped.weights)

    def test_deterministic_for_same_seed(self):
        examples = random_examples(0)
        params = TrainParams(iterations=3000, seed=7)
        model_1 = train(examples, params, num_terms=30)
        model_2 = train(examples, params, num_terms=30)
        assert np.array_equal(model_1.weights, model_2.weights)

        other = train(examples, TrainParams(iterations=3000, seed=8), num_terms=30)
        assert not np.array_equal(model_1.weights, other.weights)

    def test_num_terms_default(self):
        positive = SparseVector.from_dict({4: 1.0})
        negative = SparseVector.from_dict({1: 1.0})
        model = train([LabeledExample(positive, RELEVANT), LabeledExample(negative, NON_RELEVANT)],
                      TrainParams(iterations=5))
        assert model.num_terms == 5

    @pytest.mark.parametrize('seed', range(5))
    def test_norm_bound_holds_after_every_step(self, seed):
        examples = random_examples(seed, num_terms=20, count=10)
        params = TrainParams(lam=0.01, iterations=5000, seed=seed, check_bound=True)
        model = train(examples, params, num_terms=20)
        assert model.norm() <= params.radius * (1 + 1e-9)

    @pytest.mark.slow
    def test_norm_bound_long_run(self):
        examples = random_examples(11, num_terms=30, count=40)
        params = TrainParams(lam=1e-4, iterations=200_000, seed=11, check_bound=True)
        model = train(examples, params, num_terms=30, logger=LOG)
        assert model.norm() <= params.radius * (1 + 1e-9)

    def test_training_ranks_positives_first(self):
        """
        With two clearly separated classes the trained model has a training AUC of one.
        """
        rng = np.random.default_rng(5)
        examples = []
        for _ in range(15):
            examples.append(LabeledExample(SparseVector.from_dict({0: 1.0, int(rng.integers(2, 10)): 0.3}).normalize(), RELEVANT))
            examples.append(LabeledExample(SparseVector.from_dict({1: 1.0, int(rng.integers(2, 10)): 0.3}).normalize(), NON_RELEVANT))

        model = train(examples, TrainParams(iterations=5000), num_terms=10)
        positive = [score(model, e.vector) for e in examples if e.label == RELEVANT]
        negative = [score(model, e.vector) for e in examples if e.label == NON_RELEVANT]
        assert auc(positive, negative) == 1.0


class TestModel:

    def test_zero_model_scores_zero(self):
        model = zero_model(4)
        assert score(model, SparseVector.from_dict({1: 0.5, 3: 0.5})) == 0.0
        assert model.norm() == 0.0

    def test_score_all_does_not_depend_on_workers(self):
        model = train(random_examples(2), TrainParams(iterations=500), num_terms=30)
        rng = np.random.default_rng(9)
        vectors = [random_vector(rng, 30) for _ in range(50)]
        matrix = sp.csr_matrix(np.array([vector.to_dense(30) for vector in vectors]))

        sequential = score_all(model, matrix)
        threaded = score_all(model, matrix, workers=4, chunk_size=7)
        assert np.array_equal(sequential, threaded)
        for row, vector in enumerate(vectors):
            assert sequential[row] == pytest.approx(score(model, vector))

    def test_score_all_rejects_mismatched_matrix(self):
        with pytest.raises(ValueError):
            score_all(zero_model(4), sp.identity(5, format='csr'))

    def test_score_all_of_empty_matrix(self):
        scores = score_all(zero_model(4), sp.csr_matrix((0, 4)), workers=2)
        assert scores.shape == (0,)


def test_auc():
    assert auc([3.0, 2.0], [1.0, 0.0]) == 1.0
    assert auc([0.0], [1.0]) == 0.0
    assert auc([1.0], [1.0]) == 0.5
    with pytest.raises(ValueError):
        auc([], [1.0])
