from typing import Optional, Tuple

import numpy as np

from ..factors import FactorModel, score_pairs
from ..splitting import FeedbackPartition
from .schema import TrainingBatch, WeightSchema

MISSING_MODES = ("sample", "exact")


def missing_stand_in(
    partition: FeedbackPartition,
    mode: str = "sample",
    size: Optional[int] = None,
    seed: int = 0,
) -> np.ndarray:
    """Pairs standing in for the missing set.

    ``sample`` draws ``size`` (default: number of positives) pairs from a
    fixed seed; ``exact`` enumerates the whole missing set.
    """
    if mode not in MISSING_MODES:
        raise ValueError(f"unknown missing mode: {mode}")
    if mode == "exact":
        return partition.missing_pairs()
    if partition.num_missing == 0:
        return np.empty((0, 2), dtype=np.int64)
    size = len(partition.positives) if size is None else size
    return partition.sample_missing(size, np.random.default_rng(seed))


def full_batch(
    partition: FeedbackPartition,
    schema: WeightSchema,
    missing_pairs: Optional[np.ndarray] = None,
) -> TrainingBatch:
    if missing_pairs is None:
        missing_pairs = missing_stand_in(partition) if schema.gamma else np.empty((0, 2))
    return TrainingBatch.from_sets(
        schema, partition.positives, partition.negatives, missing_pairs
    )


def objective(
    model: FactorModel,
    partition: FeedbackPartition,
    schema: WeightSchema,
    lam: float,
    missing_pairs: Optional[np.ndarray] = None,
) -> float:
    batch = full_batch(partition, schema, missing_pairs)
    scores = score_pairs(model, batch.users, batch.items)
    data = float(np.sum(batch.weights * (scores - batch.targets) ** 2))
    penalty = float(np.sum(model.user_factors**2) + np.sum(model.item_factors**2))
    return data + lam * penalty


def objective_gradient(
    model: FactorModel,
    partition: FeedbackPartition,
    schema: WeightSchema,
    lam: float,
    missing_pairs: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of :func:`objective` w.r.t. user and item factors."""
    batch = full_batch(partition, schema, missing_pairs)
    scores = score_pairs(model, batch.users, batch.items)
    residual = 2.0 * batch.weights * (scores - batch.targets)
    grad_users = 2.0 * lam * model.user_factors
    grad_items = 2.0 * lam * model.item_factors
    np.add.at(grad_users, batch.users, residual[:, None] * model.item_factors[batch.items])
    np.add.at(grad_items, batch.items, residual[:, None] * model.user_factors[batch.users])
    return grad_users, grad_items
