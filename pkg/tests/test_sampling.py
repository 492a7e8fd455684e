import numpy as np
import pytest

from pikieval.errors import ConfigurationError
from pikieval.splitting import Interactions, partition_feedback
from pikieval.training.sampling import check_sampleable, sample_batch
from pikieval.training.schema import (
    LIKES,
    LIKES_AND_DISLIKES,
    TrainingBatch,
    WeightSchema,
)


@pytest.fixture
def partition():
    triples = [(u, s, (u + s) % 2) for u in range(6) for s in range(6) if (u * s) % 3 == 0]
    return partition_feedback(Interactions.from_triples(triples), num_users=6, num_songs=6)


def test_schema_validation():
    with pytest.raises(ValueError):
        WeightSchema(-0.1, 0.5, 0.5)
    with pytest.raises(ValueError):
        WeightSchema(0.0, 0.0, 0.0)
    np.testing.assert_allclose(WeightSchema(1.0, 1.0, 2.0).source_probabilities, [0.25, 0.25, 0.5])


def test_from_sets_skips_zero_weights():
    batch = TrainingBatch.from_sets(LIKES, [(0, 1)], [(1, 1)], [(2, 2), (3, 3)])
    assert batch.users.tolist() == [0, 2, 3]
    assert batch.targets.tolist() == [1.0, 0.0, 0.0]
    assert batch.weights.tolist() == [0.5, 0.5, 0.5]


def test_likes_never_draws_dislikes(partition):
    batch = sample_batch(partition, LIKES, 2000, np.random.default_rng(0))
    observed = partition.is_observed(batch.users, batch.items)
    liked = batch.targets == 1
    assert observed[liked].all()
    assert not observed[~liked].any()
    assert liked.mean() == pytest.approx(0.5, abs=0.05)


def test_likes_and_dislikes_never_draws_missing(partition):
    batch = sample_batch(partition, LIKES_AND_DISLIKES, 2000, np.random.default_rng(0))
    assert partition.is_observed(batch.users, batch.items).all()
    negatives = {tuple(p) for p in partition.negatives.tolist()}
    for u, i, target in zip(batch.users, batch.items, batch.targets):
        assert ((u, i) in negatives) == (target == 0)


def test_source_proportions(partition):
    schema = WeightSchema(0.2, 0.3, 0.5)
    batch = sample_batch(partition, schema, 20000, np.random.default_rng(1))
    observed = partition.is_observed(batch.users, batch.items)
    assert np.mean(batch.targets == 1) == pytest.approx(0.2, abs=0.02)
    assert np.mean(observed & (batch.targets == 0)) == pytest.approx(0.3, abs=0.02)
    assert np.mean(~observed) == pytest.approx(0.5, abs=0.02)


def test_same_seed_same_batch(partition):
    a = sample_batch(partition, LIKES, 64, np.random.default_rng(5))
    b = sample_batch(partition, LIKES, 64, np.random.default_rng(5))
    np.testing.assert_array_equal(a.users, b.users)
    np.testing.assert_array_equal(a.items, b.items)


def test_unsampleable_sets():
    only_likes = partition_feedback(
        Interactions.from_triples([(0, 0, 1), (1, 1, 1)]), num_users=2, num_songs=2
    )
    with pytest.raises(ConfigurationError):
        check_sampleable(only_likes, LIKES_AND_DISLIKES)
    check_sampleable(only_likes, LIKES)

    full = partition_feedback(
        Interactions.from_triples([(0, 0, 1), (0, 1, 0)]), num_users=1, num_songs=2
    )
    with pytest.raises(ConfigurationError):
        sample_batch(full, LIKES, 8, np.random.default_rng(0))
