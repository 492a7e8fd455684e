from dataclasses import dataclass

import numpy as np

POSITIVE, NEGATIVE, MISSING = 0, 1, 2


@dataclass(frozen=True)
class WeightSchema:
    """Weights on the positive, negative and missing feedback sets.

    Classic implicit-feedback WRMF is the case beta = 0: likes are pulled
    towards 1 and unobserved pairs towards 0.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError(f"weights must be non-negative: {self}")
        if self.alpha + self.beta + self.gamma <= 0:
            raise ValueError("at least one weight must be positive")

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma], dtype=np.float64)

    @property
    def source_probabilities(self) -> np.ndarray:
        weights = self.weights
        return weights / weights.sum()


LIKES = WeightSchema(alpha=0.5, beta=0.0, gamma=0.5)
LIKES_AND_DISLIKES = WeightSchema(alpha=0.5, beta=0.5, gamma=0.0)


@dataclass(frozen=True, eq=False)
class TrainingBatch:
    """(user, item, target, weight) rows; targets are 1 only for positive draws."""

    users: np.ndarray
    items: np.ndarray
    targets: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.users)

    @classmethod
    def from_sets(cls, schema: WeightSchema, positives, negatives, missing) -> "TrainingBatch":
        users, items, targets, weights = [], [], [], []
        for pairs, target, weight in (
            (positives, 1.0, schema.alpha),
            (negatives, 0.0, schema.beta),
            (missing, 0.0, schema.gamma),
        ):
            pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
            if weight == 0 or len(pairs) == 0:
                continue
            users.append(pairs[:, 0])
            items.append(pairs[:, 1])
            targets.append(np.full(len(pairs), target))
            weights.append(np.full(len(pairs), weight))
        if not users:
            return cls.empty()
        return cls(
            np.concatenate(users),
            np.concatenate(items),
            np.concatenate(targets),
            np.concatenate(weights),
        )

    @classmethod
    def empty(cls) -> "TrainingBatch":
        return cls(
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.float64),
            np.empty(0, dtype=np.float64),
        )
