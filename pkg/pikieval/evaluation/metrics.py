"""Median-threshold recommendations and per-stakeholder precision."""
import logging

from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

import numpy as np

from ..factors import FactorModel, predict_batch
from ..splitting import Interactions, SplitBundle

_log = logging.getLogger(__name__)

CONSUMERS = "consumers"
WELL_KNOWN = "well_known"
LESSER_KNOWN = "lesser_known"
STAKEHOLDERS = (WELL_KNOWN, LESSER_KNOWN, CONSUMERS)


@dataclass(frozen=True, eq=False)
class ScoredInteractions:
    users: np.ndarray
    songs: np.ndarray
    labels: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return len(self.scores)

    @classmethod
    def from_tuples(cls, rows: Iterable[Tuple[int, int, int, float]]) -> "ScoredInteractions":
        rows = list(rows)
        return cls(
            np.array([r[0] for r in rows], dtype=np.int64),
            np.array([r[1] for r in rows], dtype=np.int64),
            np.array([r[2] for r in rows], dtype=np.int8),
            np.array([r[3] for r in rows], dtype=np.float64),
        )

    @classmethod
    def from_model(cls, model: FactorModel, interactions: Interactions) -> "ScoredInteractions":
        pairs = np.stack([interactions.users, interactions.songs], axis=1)
        return cls(
            interactions.users,
            interactions.songs,
            interactions.labels,
            predict_batch(model, pairs),
        )


@dataclass(frozen=True, eq=False)
class RecommendationSet:
    """Entries scoring strictly above the median, split by artist segment."""

    scored: ScoredInteractions
    threshold: float
    recommended_mask: np.ndarray
    well_known_mask: np.ndarray

    @property
    def recommended(self) -> np.ndarray:
        return np.flatnonzero(self.recommended_mask)

    @property
    def recommended_well_known(self) -> np.ndarray:
        return np.flatnonzero(self.recommended_mask & self.well_known_mask)

    @property
    def recommended_lesser_known(self) -> np.ndarray:
        return np.flatnonzero(self.recommended_mask & ~self.well_known_mask)


@dataclass(frozen=True)
class RunPrecision:
    """Recommendation and like counts of one run; precisions derive from them."""

    recommended: int
    recommended_liked: int
    well_known: int
    well_known_liked: int
    lesser_known: int
    lesser_known_liked: int
    seed: Optional[int] = None
    cold_pairs: int = 0
    chosen_lambda: Optional[float] = None

    @property
    def empty(self) -> bool:
        return self.recommended == 0

    def count(self, stakeholder: str) -> Tuple[int, int]:
        if stakeholder == CONSUMERS:
            return self.recommended, self.recommended_liked
        if stakeholder == WELL_KNOWN:
            return self.well_known, self.well_known_liked
        if stakeholder == LESSER_KNOWN:
            return self.lesser_known, self.lesser_known_liked
        raise KeyError(stakeholder)

    def precision(self, stakeholder: str) -> Optional[float]:
        """Liked fraction, or None when the segment received no recommendations."""
        total, liked = self.count(stakeholder)
        return liked / total if total else None

    @classmethod
    def from_masks(cls, labels, recommended, well_known, **extra) -> "RunPrecision":
        liked = np.asarray(labels) == 1
        return cls(
            recommended=int(recommended.sum()),
            recommended_liked=int((recommended & liked).sum()),
            well_known=int((recommended & well_known).sum()),
            well_known_liked=int((recommended & well_known & liked).sum()),
            lesser_known=int((recommended & ~well_known).sum()),
            lesser_known_liked=int((recommended & ~well_known & liked).sum()),
            **extra,
        )


@dataclass(frozen=True)
class StakeholderReport:
    """Per-run precisions of one model and their mean and sample std."""

    model: str
    runs: Tuple[RunPrecision, ...]

    def values(self, stakeholder: str) -> List[float]:
        values = (run.precision(stakeholder) for run in self.runs)
        return [v for v in values if v is not None]

    def mean(self, stakeholder: str) -> Optional[float]:
        values = self.values(stakeholder)
        return float(np.mean(values)) if values else None

    def std(self, stakeholder: str) -> Optional[float]:
        values = self.values(stakeholder)
        if not values:
            return None
        if len(values) == 1:
            return 0.0
        return float(np.std(values, ddof=1))

    @property
    def consumers(self) -> Optional[float]:
        return self.mean(CONSUMERS)

    @property
    def well_known(self) -> Optional[float]:
        return self.mean(WELL_KNOWN)

    @property
    def lesser_known(self) -> Optional[float]:
        return self.mean(LESSER_KNOWN)

    @property
    def no_recommendations(self) -> bool:
        return all(run.empty for run in self.runs)

    def renamed(self, model: str) -> "StakeholderReport":
        return replace(self, model=model)


def recommend_by_median(
    scored: ScoredInteractions, song_well_known: np.ndarray
) -> RecommendationSet:
    if len(scored) == 0:
        raise ValueError("cannot threshold an empty set of scores")
    threshold = float(np.median(scored.scores))
    return RecommendationSet(
        scored=scored,
        threshold=threshold,
        recommended_mask=scored.scores > threshold,
        well_known_mask=np.asarray(song_well_known, dtype=bool)[scored.songs],
    )


def stakeholder_precision(
    recs: RecommendationSet, model: str = "model", **extra
) -> StakeholderReport:
    run = RunPrecision.from_masks(
        recs.scored.labels, recs.recommended_mask, recs.well_known_mask, **extra
    )
    if run.empty:
        _log.warning("%s made no recommendations (threshold %g)", model, recs.threshold)
    return StakeholderReport(model=model, runs=(run,))


def consumer_precision(model: FactorModel, interactions: Interactions) -> float:
    """Consumer precision under the median rule; 0.0 when nothing clears it."""
    scored = ScoredInteractions.from_model(model, interactions)
    threshold = np.median(scored.scores)
    recommended = scored.scores > threshold
    if not recommended.any():
        return 0.0
    return float(np.mean(scored.labels[recommended] == 1))


def cold_pair_count(split: SplitBundle) -> int:
    """Evaluation pairs whose user or song never occurs on the training side."""
    seen_users = np.zeros(split.num_users, dtype=bool)
    seen_songs = np.zeros(split.num_songs, dtype=bool)
    seen_users[split.train.users] = True
    seen_songs[split.train.songs] = True
    cold = ~seen_users[split.evaluation.users] | ~seen_songs[split.evaluation.songs]
    return int(cold.sum())


def evaluate_model(
    model: FactorModel,
    split: SplitBundle,
    name: str,
    chosen_lambda: Optional[float] = None,
) -> StakeholderReport:
    scored = ScoredInteractions.from_model(model, split.evaluation)
    recs = recommend_by_median(scored, split.song_well_known)
    return stakeholder_precision(
        recs,
        model=name,
        seed=split.seed,
        cold_pairs=cold_pair_count(split),
        chosen_lambda=chosen_lambda,
    )
