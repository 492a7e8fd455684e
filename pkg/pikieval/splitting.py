import logging
import math

from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .dataset import Dataset
from .errors import ConfigurationError

_log = logging.getLogger(__name__)

DEFAULT_RATIO = 0.8
VALIDATION_RATIO = 0.9


@dataclass(frozen=True, eq=False)
class Interactions:
    """Aligned (user, song, binary label) arrays."""

    users: np.ndarray
    songs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if not len(self.users) == len(self.songs) == len(self.labels):
            raise ValueError("users, songs and labels must have equal length")

    def __len__(self) -> int:
        return len(self.users)

    @classmethod
    def from_triples(cls, triples: Iterable[Tuple[int, int, int]]) -> "Interactions":
        rows = np.asarray(list(triples), dtype=np.int64).reshape(-1, 3)
        return cls(rows[:, 0], rows[:, 1], rows[:, 2].astype(np.int8))

    def take(self, index: np.ndarray) -> "Interactions":
        return Interactions(self.users[index], self.songs[index], self.labels[index])

    def triples(self) -> List[Tuple[int, int, int]]:
        return list(
            zip(self.users.tolist(), self.songs.tolist(), self.labels.tolist())
        )


@dataclass(frozen=True, eq=False)
class SplitBundle:
    train: Interactions
    validation: Interactions
    evaluation: Interactions
    seed: int
    num_users: int
    num_songs: int
    song_well_known: np.ndarray


@dataclass(frozen=True, eq=False)
class FeedbackPartition:
    """Observed likes and dislikes; the missing set is everything else in the grid.

    Missing pairs are never stored. ``observed_keys`` holds the sorted
    ``user * num_songs + song`` codes of every observed pair for membership
    tests and rejection sampling.
    """

    positives: np.ndarray
    negatives: np.ndarray
    num_users: int
    num_songs: int
    observed_keys: np.ndarray

    @property
    def num_missing(self) -> int:
        return self.num_users * self.num_songs - len(self.observed_keys)

    def _keys(self, users, songs) -> np.ndarray:
        users = np.asarray(users, dtype=np.int64)
        songs = np.asarray(songs, dtype=np.int64)
        if np.any((users < 0) | (users >= self.num_users)):
            raise IndexError("user index out of range")
        if np.any((songs < 0) | (songs >= self.num_songs)):
            raise IndexError("song index out of range")
        return users * self.num_songs + songs

    def is_observed(self, users, songs) -> np.ndarray:
        keys = self._keys(users, songs)
        if len(self.observed_keys) == 0:
            return np.zeros(np.shape(keys), dtype=bool)
        position = np.searchsorted(self.observed_keys, keys)
        position = np.minimum(position, len(self.observed_keys) - 1)
        return self.observed_keys[position] == keys

    def is_missing(self, users, songs) -> np.ndarray:
        return ~self.is_observed(users, songs)

    def sample_missing(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` unobserved pairs uniformly, with replacement."""
        if size and self.num_missing == 0:
            raise ConfigurationError("missing feedback set is empty")
        chunks = []
        remaining = size
        grid = self.num_users * self.num_songs
        while remaining > 0:
            keys = rng.integers(0, grid, size=max(2 * remaining, 64))
            users, songs = np.divmod(keys, self.num_songs)
            keep = keys[self.is_missing(users, songs)][:remaining]
            chunks.append(keep)
            remaining -= len(keep)
        keys = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
        return np.stack(np.divmod(keys, self.num_songs), axis=1)

    def missing_pairs(self) -> np.ndarray:
        """Enumerate the whole missing set; only sensible for tiny grids."""
        grid = np.arange(self.num_users * self.num_songs)
        keys = np.setdiff1d(grid, self.observed_keys, assume_unique=True)
        return np.stack(np.divmod(keys, self.num_songs), axis=1)


def _split_by_user(
    users: np.ndarray, index: np.ndarray, ratio: float, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Shuffle each user's rows and keep floor(ratio * n) on the head side.

    Users with fewer than two rows stay entirely on the head side.
    """
    order = np.argsort(users, kind="stable")
    bounds = np.flatnonzero(np.diff(users[order])) + 1
    head = [np.empty(0, dtype=np.int64)]
    tail = [np.empty(0, dtype=np.int64)]
    for group in np.split(index[order], bounds):
        if len(group) < 2:
            head.append(group)
            continue
        shuffled = rng.permutation(group)
        # guard floor() against 0.8 * n landing a hair below an integer
        cut = math.floor(ratio * len(shuffled) + 1e-9)
        head.append(shuffled[:cut])
        tail.append(shuffled[cut:])
    return np.sort(np.concatenate(head)), np.sort(np.concatenate(tail))


def stratified_split(
    dataset: Dataset,
    ratio: float = DEFAULT_RATIO,
    seed: int = 0,
    validation_ratio: float = VALIDATION_RATIO,
) -> SplitBundle:
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio {ratio} outside (0, 1)")
    if not 0 < validation_ratio < 1:
        raise ValueError(f"validation ratio {validation_ratio} outside (0, 1)")
    if len(dataset) == 0:
        raise ValueError("cannot split an empty dataset")

    users, songs, labels = dataset.interactions()
    everything = Interactions(users, songs, labels)
    rng = np.random.default_rng(seed)
    train_idx, eval_idx = _split_by_user(users, np.arange(len(users)), ratio, rng)
    keep_idx, val_idx = _split_by_user(users[train_idx], train_idx, validation_ratio, rng)

    bundle = SplitBundle(
        train=everything.take(keep_idx),
        validation=everything.take(val_idx),
        evaluation=everything.take(eval_idx),
        seed=seed,
        num_users=dataset.num_users,
        num_songs=dataset.num_songs,
        song_well_known=dataset.song_well_known,
    )
    _log.debug(
        "split seed %d: %d train, %d validation, %d evaluation",
        seed,
        len(bundle.train),
        len(bundle.validation),
        len(bundle.evaluation),
    )
    return bundle


def partition_feedback(
    interactions: Interactions, num_users: int, num_songs: int
) -> FeedbackPartition:
    pairs = np.stack([interactions.users, interactions.songs], axis=1).astype(np.int64)
    liked = interactions.labels == 1
    keys = np.unique(pairs[:, 0] * num_songs + pairs[:, 1])
    return FeedbackPartition(
        positives=pairs[liked].reshape(-1, 2),
        negatives=pairs[~liked].reshape(-1, 2),
        num_users=num_users,
        num_songs=num_songs,
        observed_keys=keys,
    )
