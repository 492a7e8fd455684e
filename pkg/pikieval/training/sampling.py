import numpy as np

from ..errors import ConfigurationError
from ..splitting import FeedbackPartition
from .schema import MISSING, NEGATIVE, POSITIVE, TrainingBatch, WeightSchema


def check_sampleable(partition: FeedbackPartition, schema: WeightSchema):
    if schema.alpha > 0 and len(partition.positives) == 0:
        raise ConfigurationError("alpha > 0 but there are no positive interactions")
    if schema.beta > 0 and len(partition.negatives) == 0:
        raise ConfigurationError("beta > 0 but there are no negative interactions")
    if schema.gamma > 0 and partition.num_missing == 0:
        raise ConfigurationError("gamma > 0 but the missing feedback set is empty")


def sample_batch(
    partition: FeedbackPartition,
    schema: WeightSchema,
    batch_size: int,
    rng: np.random.Generator,
) -> TrainingBatch:
    """Draw ``batch_size`` weighted triples.

    Each draw picks a feedback set with probability proportional to its
    weight, then a pair uniformly inside that set.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be positive, got {batch_size}")
    check_sampleable(partition, schema)

    sources = rng.choice(3, size=batch_size, p=schema.source_probabilities)
    pairs = np.empty((batch_size, 2), dtype=np.int64)
    for source, observed in ((POSITIVE, partition.positives), (NEGATIVE, partition.negatives)):
        slots = np.flatnonzero(sources == source)
        if len(slots):
            pairs[slots] = observed[rng.integers(0, len(observed), size=len(slots))]
    slots = np.flatnonzero(sources == MISSING)
    if len(slots):
        pairs[slots] = partition.sample_missing(len(slots), rng)

    return TrainingBatch(
        users=pairs[:, 0],
        items=pairs[:, 1],
        targets=(sources == POSITIVE).astype(np.float64),
        weights=schema.weights[sources],
    )
