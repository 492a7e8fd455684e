import numpy as np

from ..splitting import Interactions
from .metrics import RunPrecision, StakeholderReport

POPULARITY = "Popularity"
ANTI_POPULARITY = "Anti-popularity"


def _segment_baseline(
    evaluation: Interactions, recommended: np.ndarray, well_known: np.ndarray, name: str, seed
) -> StakeholderReport:
    if len(evaluation) == 0:
        raise ValueError("evaluation set is empty")
    run = RunPrecision.from_masks(evaluation.labels, recommended, well_known, seed=seed)
    return StakeholderReport(model=name, runs=(run,))


def popularity_baseline(
    evaluation: Interactions, song_well_known: np.ndarray, seed=None
) -> StakeholderReport:
    """Recommend every evaluation song by a well-known artist."""
    well_known = np.asarray(song_well_known, dtype=bool)[evaluation.songs]
    return _segment_baseline(evaluation, well_known, well_known, POPULARITY, seed)


def anti_popularity_baseline(
    evaluation: Interactions, song_well_known: np.ndarray, seed=None
) -> StakeholderReport:
    """Recommend every evaluation song by a lesser-known artist."""
    well_known = np.asarray(song_well_known, dtype=bool)[evaluation.songs]
    return _segment_baseline(evaluation, ~well_known, well_known, ANTI_POPULARITY, seed)
