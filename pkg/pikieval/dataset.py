import logging
import re

from dataclasses import dataclass
from datetime import datetime
from functools import cached_property
from typing import Dict, Iterator, Tuple

import numpy as np
import pandas as pd

from .errors import EmptyDatasetError, LabelError, RowParseError, SchemaError

_log = logging.getLogger(__name__)

COLUMNS = (
    "timestamp",
    "user_id",
    "song_id",
    "liked",
    "personalized",
    "spotify_popularity",
)
LABELS = (0, 1, 2)
WELL_KNOWN = "well-known"
LESSER_KNOWN = "lesser-known"
FEEDBACK_FILTERS = ("all", "personalized", "random")


@dataclass(frozen=True)
class InteractionRecord:
    """One rating event as it appears in the export."""

    timestamp: datetime
    user_id: str
    song_id: str
    label: int
    personalized: bool
    artist_popularity: int

    def __post_init__(self):
        if self.label not in LABELS:
            raise LabelError(f"label {self.label} outside {{0, 1, 2}}")
        if not 0 <= self.artist_popularity <= 100:
            raise ValueError(
                f"artist popularity {self.artist_popularity} outside [0, 100]"
            )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Deduplicated interactions with dense user and song indices.

    ``frame`` keeps the export columns plus ``user``/``song`` (dense indices)
    and ``label`` (binarized ``liked``). Row order is file order.
    """

    frame: pd.DataFrame
    user_ids: np.ndarray
    song_ids: np.ndarray
    song_popularity: np.ndarray
    popularity_threshold: float
    song_well_known: np.ndarray

    @property
    def num_users(self) -> int:
        return len(self.user_ids)

    @property
    def num_songs(self) -> int:
        return len(self.song_ids)

    def __len__(self) -> int:
        return len(self.frame)

    @cached_property
    def user_index(self) -> Dict[str, int]:
        return {user_id: idx for idx, user_id in enumerate(self.user_ids)}

    @cached_property
    def song_index(self) -> Dict[str, int]:
        return {song_id: idx for idx, song_id in enumerate(self.song_ids)}

    def song_segment(self, song: int) -> str:
        return WELL_KNOWN if self.song_well_known[song] else LESSER_KNOWN

    def interactions(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (users, songs, binary labels) as aligned arrays."""
        return (
            self.frame["user"].to_numpy(dtype=np.int64),
            self.frame["song"].to_numpy(dtype=np.int64),
            self.frame["label"].to_numpy(dtype=np.int8),
        )

    def records(self) -> Iterator[InteractionRecord]:
        for row in self.frame.itertuples(index=False):
            yield InteractionRecord(
                timestamp=row.timestamp.to_pydatetime(),
                user_id=row.user_id,
                song_id=row.song_id,
                label=int(row.liked),
                personalized=bool(row.personalized),
                artist_popularity=int(row.spotify_popularity),
            )


@dataclass(frozen=True)
class PlantedFactors:
    """Ground-truth taste vectors behind a synthetic dataset, aligned to its dense indices."""

    user_factors: np.ndarray
    song_factors: np.ndarray

    def scores(self, users: np.ndarray, songs: np.ndarray) -> np.ndarray:
        return np.sum(self.user_factors[users] * self.song_factors[songs], axis=1)


@dataclass(frozen=True)
class DatasetSummary:
    num_users: int
    num_songs: int
    num_interactions: int
    like_rate: float
    superlike_rate: float
    personalized_rate: float
    popularity_mean: float
    well_known_songs: int
    lesser_known_songs: int
    user_like_rates: Tuple[float, ...]
    song_like_rates: Tuple[float, ...]


def binarize(label: int) -> int:
    """Map dislike to 0 and like or superlike to 1."""
    if isinstance(label, (bool, np.bool_)) or label not in LABELS:
        raise LabelError(f"label {label!r} outside {{0, 1, 2}}")
    return 0 if label == 0 else 1


def binarize_labels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    invalid = ~np.isin(labels, LABELS)
    if invalid.any():
        raise LabelError(f"label {labels[invalid][0]!r} outside {{0, 1, 2}}")
    return (labels > 0).astype(np.int8)


def segment_by_popularity(dataset: Dataset) -> Dict[str, str]:
    """Assign every song to the well-known or lesser-known segment.

    Reads the split fixed by :func:`build_dataset`, where a song is
    well-known only when its popularity is strictly above the record mean.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot segment an empty dataset")
    return {
        song_id: WELL_KNOWN if well_known else LESSER_KNOWN
        for song_id, well_known in zip(dataset.song_ids, dataset.song_well_known)
    }


def build_dataset(frame: pd.DataFrame) -> Dataset:
    """Index a parsed, deduplicated frame of export rows."""
    if frame.empty:
        raise EmptyDatasetError("dataset has no interactions")
    frame = frame.reset_index(drop=True)
    users, user_ids = pd.factorize(frame["user_id"], sort=False)
    songs, song_ids = pd.factorize(frame["song_id"], sort=False)
    frame = frame.assign(
        user=users.astype(np.int64),
        song=songs.astype(np.int64),
        label=binarize_labels(frame["liked"].to_numpy()),
    )

    # the most recent rating carries the song's current artist popularity
    latest = frame.sort_values("timestamp", kind="stable").drop_duplicates(
        "song", keep="last"
    )
    popularity = np.zeros(len(song_ids), dtype=np.int64)
    popularity[latest["song"].to_numpy()] = latest["spotify_popularity"].to_numpy()
    threshold = float(frame["spotify_popularity"].mean())

    return Dataset(
        frame=frame,
        user_ids=np.asarray(user_ids, dtype=object),
        song_ids=np.asarray(song_ids, dtype=object),
        song_popularity=popularity,
        popularity_threshold=threshold,
        song_well_known=popularity > threshold,
    )


def deduplicate(frame: pd.DataFrame) -> pd.DataFrame:
    """Keep the latest rating of every (user, song) pair, in file order."""
    ordered = frame.sort_values("timestamp", kind="stable")
    kept = ordered.drop_duplicates(["user_id", "song_id"], keep="last")
    return kept.sort_index()


def load_csv(path, feedback: str = "all") -> Dataset:
    """Read a Piki export.

    ``feedback`` keeps every rating (``all``), only recommended ones
    (``personalized``) or only randomly served ones (``random``).
    """
    if feedback not in FEEDBACK_FILTERS:
        raise ValueError(f"unknown feedback filter: {feedback}")
    try:
        raw = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise RowParseError(line, str(e)) from e
    except pd.errors.EmptyDataError as e:
        raise SchemaError("timestamp", "missing") from e

    _check_columns(raw.columns)
    raw = raw.rename(columns=lambda c: c.strip())
    lines = _line_numbers(raw)
    blank = (raw.fillna("").apply(lambda column: column.str.strip()) == "").all(axis=1)
    blank = blank.astype(bool)
    frame = _parse_rows(raw[~blank], lines[~blank])
    total = len(frame)
    if feedback == "personalized":
        frame = frame[frame["personalized"]]
    elif feedback == "random":
        frame = frame[~frame["personalized"]]
    frame = deduplicate(frame)
    _log.info(
        "loaded %s: %d rows, %d kept after %s filter and deduplication",
        path,
        total,
        len(frame),
        feedback,
    )
    return build_dataset(frame)


def _check_columns(columns):
    present = [c.strip() for c in columns]
    for column in COLUMNS:
        if column not in present:
            raise SchemaError(column, "missing")
    for column in present:
        if column not in COLUMNS:
            raise SchemaError(column, "unexpected")


def _line_numbers(raw: pd.DataFrame) -> pd.Series:
    """Physical line each row starts on, counting newlines inside quoted fields."""
    embedded = raw.fillna("").apply(lambda column: column.str.count("\n")).sum(axis=1)
    offset = embedded.cumsum().shift(fill_value=0)
    # header is line 1
    return pd.Series(np.arange(len(raw)) + 2, index=raw.index) + offset


def _parse_rows(raw: pd.DataFrame, lines: pd.Series) -> pd.DataFrame:
    timestamps = pd.to_datetime(
        raw["timestamp"], utc=True, errors="coerce", format="ISO8601"
    )
    retry = timestamps.isna() & (raw["timestamp"] != "")
    if retry.any():
        timestamps[retry] = pd.to_datetime(
            raw.loc[retry, "timestamp"], utc=True, errors="coerce", format="mixed"
        )
    numbers = {
        column: pd.to_numeric(raw[column].str.strip(), errors="coerce")
        for column in ("liked", "personalized", "spotify_popularity")
    }

    bad = timestamps.isna()
    for column in ("user_id", "song_id"):
        bad |= raw[column].isna() | (raw[column] == "")
    for values in numbers.values():
        bad |= values.isna() | (values % 1 != 0)
    bad |= ~numbers["personalized"].isin((0, 1))
    bad |= ~numbers["spotify_popularity"].between(0, 100)
    _raise_first(bad, raw, lines)

    liked = numbers["liked"].astype(np.int64)
    invalid = ~liked.isin(LABELS)
    if invalid.any():
        position = int(np.argmax(invalid.to_numpy()))
        raise LabelError(
            f"line {lines.iloc[position]}: label {liked.iloc[position]} outside {{0, 1, 2}}"
        )

    return pd.DataFrame(
        {
            "timestamp": timestamps,
            "user_id": raw["user_id"].astype(str),
            "song_id": raw["song_id"].astype(str),
            "liked": liked,
            "personalized": numbers["personalized"].astype(bool),
            "spotify_popularity": numbers["spotify_popularity"].astype(np.int64),
        }
    )


def _raise_first(mask: pd.Series, raw: pd.DataFrame, lines: pd.Series):
    if not mask.any():
        return
    position = int(np.argmax(mask.to_numpy()))
    row = ",".join(raw.iloc[position].astype(str))
    raise RowParseError(int(lines.iloc[position]), f"cannot parse row: {row}")


def write_csv(dataset: Dataset, path):
    """Write a dataset back out in the export schema."""
    frame = dataset.frame
    out = pd.DataFrame(
        {
            "timestamp": frame["timestamp"].map(lambda t: t.isoformat()),
            "user_id": frame["user_id"],
            "song_id": frame["song_id"],
            "liked": frame["liked"].astype(np.int64),
            "personalized": frame["personalized"].astype(np.int64),
            "spotify_popularity": frame["spotify_popularity"].astype(np.int64),
        }
    )
    out.to_csv(path, index=False, columns=list(COLUMNS), lineterminator="\n")


def generate_synthetic(
    num_users: int,
    num_songs: int,
    d_true: int,
    density: float,
    noise: float,
    seed: int,
    personalized_rate: float = 0.66,
) -> Tuple[Dataset, PlantedFactors]:
    """Generate a dataset whose labels follow the sign of planted dot products.

    Every user and song is rated at least once; the remaining pairs are drawn
    uniformly until ``density`` of the full grid is covered. Labels are
    flipped independently with probability ``noise``. Songs belong to
    synthetic artists that alternate between a popular band (60-100) and an
    obscure band (0-40), so both segments are populated.
    """
    if num_users < 1 or num_songs < 2 or d_true < 1:
        raise ValueError("synthetic dataset needs >= 1 user, >= 2 songs, d_true >= 1")
    if not 0 < density <= 1:
        raise ValueError(f"density {density} outside (0, 1]")
    if not 0 <= noise < 0.5:
        raise ValueError(f"noise {noise} outside [0, 0.5)")

    rng = np.random.default_rng(seed)
    user_true = rng.standard_normal((num_users, d_true))
    song_true = rng.standard_normal((num_songs, d_true))

    total = num_users * num_songs
    span = np.arange(max(num_users, num_songs))
    cover = np.unique((span % num_users) * num_songs + span % num_songs)
    extra = max(int(round(density * total)) - len(cover), 0)
    rest = np.setdiff1d(np.arange(total), cover, assume_unique=True)
    keys = np.sort(np.concatenate([cover, rng.choice(rest, size=extra, replace=False)]))
    users, songs = np.divmod(keys, num_songs)

    liked = np.sum(user_true[users] * song_true[songs], axis=1) > 0
    flipped = rng.random(len(keys)) < noise
    labels = (liked ^ flipped).astype(np.int64)

    num_artists = max(2, num_songs // 4)
    artist_popularity = np.where(
        np.arange(num_artists) % 2 == 0,
        rng.integers(60, 101, size=num_artists),
        rng.integers(0, 41, size=num_artists),
    )
    song_popularity = artist_popularity[np.arange(num_songs) % num_artists]

    user_names = np.array([f"u{k:05d}" for k in range(num_users)], dtype=object)
    song_names = np.array([f"s{k:05d}" for k in range(num_songs)], dtype=object)
    frame = pd.DataFrame(
        {
            "timestamp": pd.Timestamp("2021-01-01", tz="UTC")
            + pd.to_timedelta(np.arange(len(keys)), unit="min"),
            "user_id": user_names[users],
            "song_id": song_names[songs],
            "liked": labels,
            "personalized": rng.random(len(keys)) < personalized_rate,
            "spotify_popularity": song_popularity[songs].astype(np.int64),
        }
    )
    dataset = build_dataset(frame)
    planted = PlantedFactors(
        user_factors=user_true[pd.Index(user_names).get_indexer(dataset.user_ids)],
        song_factors=song_true[pd.Index(song_names).get_indexer(dataset.song_ids)],
    )
    _log.debug(
        "generated %d interactions over %d users x %d songs (seed %d)",
        len(dataset),
        num_users,
        num_songs,
        seed,
    )
    return dataset, planted


def synth_generate(
    num_users: int,
    num_songs: int,
    d_true: int,
    density: float,
    noise: float,
    seed: int,
) -> Dataset:
    dataset, _ = generate_synthetic(num_users, num_songs, d_true, density, noise, seed)
    return dataset


def _like_rate_quantiles(frame: pd.DataFrame, key: str) -> Tuple[float, ...]:
    rates = frame.groupby(key)["label"].mean()
    return tuple(float(q) for q in rates.quantile([0.0, 0.25, 0.5, 0.75, 1.0]))


def dataset_summary(dataset: Dataset) -> DatasetSummary:
    frame = dataset.frame
    return DatasetSummary(
        num_users=dataset.num_users,
        num_songs=dataset.num_songs,
        num_interactions=len(frame),
        like_rate=float((frame["liked"] >= 1).mean()),
        superlike_rate=float((frame["liked"] == 2).mean()),
        personalized_rate=float(frame["personalized"].mean()),
        popularity_mean=dataset.popularity_threshold,
        well_known_songs=int(dataset.song_well_known.sum()),
        lesser_known_songs=int((~dataset.song_well_known).sum()),
        user_like_rates=_like_rate_quantiles(frame, "user"),
        song_like_rates=_like_rate_quantiles(frame, "song"),
    )
