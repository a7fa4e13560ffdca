"""
Logistic regression scorer trained with Pegasos updates on positive-minus-negative difference
vectors, which optimizes the ranking (AUC) rather than the classification accuracy.

At every step t one positive example x+ and one negative example x- are drawn uniformly with
replacement, d = x+ - x- and the weights are updated as

    w <- (1 - 1/t) * w + (1 / (lambda * t)) * sigmoid(-w.d) * d

followed by the projection of w onto the ball of radius 1/sqrt(lambda).

The weights are held as a scalar times a dense vector, so that the shrinkage of every step costs
one multiplication instead of a pass over the whole vocabulary.
"""
import math
import logging
import typing as t
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from calsim.features import SparseVector
from calsim.utils import NULL_LOGGER
from calsim.utils import TrainingError

RELEVANT = 1
NON_RELEVANT = -1

# Below this value of the weight scale, the scale is folded back into the weight vector to avoid
# the loss of floating point precision.
MIN_SCALE = 1e-10
# The running squared norm is recomputed from scratch in this interval to stop the drift.
NORM_REFRESH_INTERVAL = 10_000


@dataclass(frozen=True)
class TrainParams:
    """
    :param lam: The regularization parameter lambda > 0
    :param iterations: The number of Pegasos updates >= 1
    :param seed: The seed of the pair sampling
    :param check_bound: If true, the projection bound is verified after every single update and a
        TrainingError raised if it is violated. Slow, meant for tests.
    """
    lam: float = 1e-4
    iterations: int = 200_000
    seed: int = 0
    check_bound: bool = False

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f'lambda has to be positive, not {self.lam}')
        if self.iterations < 1:
            raise ValueError(f'iterations has to be at least 1, not {self.iterations}')

    @property
    def radius(self) -> float:
        return 1.0 / math.sqrt(self.lam)


@dataclass(frozen=True)
class LabeledExample:
    vector: SparseVector
    label: int

    def __post_init__(self):
        if self.label not in (RELEVANT, NON_RELEVANT):
            raise ValueError(f'label has to be +1 or -1, not {self.label}')


@dataclass
class ModelState:
    weights: np.ndarray
    params: TrainParams
    steps: int = 0

    @property
    def num_terms(self) -> int:
        return len(self.weights)

    def norm(self) -> float:
        return float(np.linalg.norm(self.weights))


def zero_model(num_terms: int, params: TrainParams = TrainParams()) -> ModelState:
    return ModelState(np.zeros(num_terms, dtype=np.float64), params, steps=0)


# == LOSS ==

def logistic_loss(weights: np.ndarray, difference: np.ndarray) -> float:
    """
    The logistic loss ln(1 + exp(-w.d)) of the dense difference vector ``difference``.
    """
    return float(np.logaddexp(0.0, -np.dot(weights, difference)))


def logistic_coefficient(margin: float) -> float:
    """
    The factor sigmoid(-m) by which the difference vector enters the update for the margin m = w.d.
    """
    return float(expit(-margin))


def logistic_gradient(weights: np.ndarray, difference: np.ndarray) -> np.ndarray:
    """
    The gradient -sigmoid(-w.d) * d of the logistic loss with respect to the weights.
    """
    return -logistic_coefficient(float(np.dot(weights, difference))) * difference


# == TRAINING ==

def train(examples: t.Sequence[LabeledExample],
          params: TrainParams = TrainParams(),
          num_terms: t.Optional[int] = None,
          logger: logging.Logger = NULL_LOGGER,
          ) -> ModelState:
    """
    Trains the logistic regression weights on the given labeled ``examples``.

    The result only depends on the order of the examples and on the parameters, most importantly
    the seed: the same inputs produce bit-identical weights.

    :param examples: A list of LabeledExample. At least one of each label is required.
    :param params: The training parameters
    :param num_terms: The length of the dense weight vector. Defaults to the largest term id of the
        examples plus one, the engine passes the vocabulary size.
    :param logger: Optional logger for a debug summary

    :raises TrainingError: If the examples do not contain both labels or if the projection bound is
        violated while ``params.check_bound`` is set.

    :returns: ModelState
    """
    positives = [example.vector for example in examples if example.label == RELEVANT]
    negatives = [example.vector for example in examples if example.label == NON_RELEVANT]
    if not positives or not negatives:
        raise TrainingError(f'training needs at least one positive and one negative example, got '
                            f'{len(positives)} positive and {len(negatives)} negative')

    if num_terms is None:
        num_terms = max((int(vector.indices.max()) + 1 for vector in positives + negatives if len(vector)), default=0)

    rng = np.random.Generator(np.random.PCG64(params.seed))
    positive_draws = rng.integers(0, len(positives), size=params.iterations)
    negative_draws = rng.integers(0, len(negatives), size=params.iterations)

    radius = params.radius
    vector = np.zeros(num_terms, dtype=np.float64)
    scale = 1.0
    squared_norm = 0.0

    for step in range(1, params.iterations + 1):
        positive = positives[positive_draws[step - 1]]
        negative = negatives[negative_draws[step - 1]]

        margin = scale * (np.dot(vector[positive.indices], positive.values)
                          - np.dot(vector[negative.indices], negative.values))
        coefficient = logistic_coefficient(margin)
        eta = 1.0 / (params.lam * step)

        # shrinkage: at the very first step the factor is zero which resets the weights
        if step == 1:
            vector[:] = 0.0
            scale = 1.0
            squared_norm = 0.0
        else:
            scale *= 1.0 - 1.0 / step

        factor = eta * coefficient / scale
        squared_norm += _add_scaled(vector, positive, factor)
        squared_norm += _add_scaled(vector, negative, -factor)

        if step % NORM_REFRESH_INTERVAL == 0:
            squared_norm = float(np.dot(vector, vector))

        norm = scale * math.sqrt(max(squared_norm, 0.0))
        if norm > radius:
            scale *= radius / norm

        if scale < MIN_SCALE:
            vector *= scale
            squared_norm = float(np.dot(vector, vector))
            scale = 1.0

        if params.check_bound:
            exact = scale * float(np.linalg.norm(vector))
            if not exact <= radius * (1 + 1e-9):
                raise TrainingError(f'weight norm {exact} exceeds the projection radius {radius} '
                                    f'after step {step}')

    weights = vector * scale
    logger.debug(f'trained on {len(positives)} positive and {len(negatives)} negative examples, '
                 f'|w| = {np.linalg.norm(weights):.4f}')
    return ModelState(weights=weights, params=params, steps=params.iterations)


def _add_scaled(vector: np.ndarray, sparse: SparseVector, factor: float) -> float:
    """
    Adds ``factor`` times the ``sparse`` vector to the dense ``vector`` in place and returns the
    resulting change of the squared norm.
    """
    old = vector[sparse.indices]
    new = old + factor * sparse.values
    vector[sparse.indices] = new
    return float(np.dot(new, new) - np.dot(old, old))


# == SCORING ==

def score(model: ModelState, vector: SparseVector) -> float:
    return vector.dot(model.weights)


def score_all(model: ModelState,
              matrix: sp.csr_matrix,
              workers: int = 1,
              chunk_size: int = 16384,
              ) -> np.ndarray:
    """
    Returns the score w.x of every row of the CSR ``matrix``. With more than one worker, chunks of
    rows are scored on a thread pool. The result does not depend on the number of workers.

    :param model: The trained model, its weights have to match the columns of the matrix
    :param matrix: The (num_items, num_terms) feature matrix, for example ``FeatureSpace.matrix``
    :param workers: The number of threads
    :param chunk_size: The number of rows per thread task

    :returns: A float64 array with one score per row
    """
    if matrix.shape[1] != model.num_terms:
        raise ValueError(f'matrix with {matrix.shape[1]} columns for a model of {model.num_terms} terms')

    num_rows = matrix.shape[0]
    if workers <= 1 or num_rows <= chunk_size:
        return np.asarray(matrix @ model.weights, dtype=np.float64)

    def score_chunk(start: int) -> np.ndarray:
        return matrix[start:start + chunk_size] @ model.weights

    with ThreadPoolExecutor(max_workers=workers) as executor:
        chunks = list(executor.map(score_chunk, range(0, num_rows, chunk_size)))

    return np.asarray(np.concatenate(chunks), dtype=np.float64)


def auc(positive_scores: t.Sequence[float], negative_scores: t.Sequence[float]) -> float:
    """
    The fraction of (positive, negative) pairs ranked correctly, with ties counting one half.
    """
    positive_scores = np.asarray(positive_scores, dtype=np.float64)
    negative_scores = np.asarray(negative_scores, dtype=np.float64)
    if len(positive_scores) == 0 or len(negative_scores) == 0:
        raise ValueError('auc needs at least one positive and one negative score')

    greater = (positive_scores[:, None] > negative_scores[None, :]).sum()
    equal = (positive_scores[:, None] == negative_scores[None, :]).sum()
    return float((greater + 0.5 * equal) / (len(positive_scores) * len(negative_scores)))
