import json
import logging

from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .aggregate import relative_lift
from .baselines import ANTI_POPULARITY, POPULARITY
from .metrics import CONSUMERS, LESSER_KNOWN, STAKEHOLDERS, WELL_KNOWN, StakeholderReport

_log = logging.getLogger(__name__)

LIKES_MODEL = "WRMF with Likes"
LIKES_AND_DISLIKES_MODEL = "WRMF with Likes and Dislikes"
DISPERSION = "sample standard deviation across runs (n - 1 denominator)"
UNDEFINED = "–"
COLUMN_TITLES = {
    WELL_KNOWN: "Well-known artists (%)",
    LESSER_KNOWN: "Lesser-known artists (%)",
    CONSUMERS: "Consumers (%)",
}

# published mean and spread, in percent
PUBLISHED: Dict[str, Dict[str, Optional[Tuple[float, float]]]] = {
    POPULARITY: {WELL_KNOWN: (41.1, 0.04), LESSER_KNOWN: None, CONSUMERS: (41.1, 0.04)},
    ANTI_POPULARITY: {WELL_KNOWN: None, LESSER_KNOWN: (36.3, 0.06), CONSUMERS: (36.3, 0.06)},
    LIKES_MODEL: {WELL_KNOWN: (51.9, 0.29), LESSER_KNOWN: (48.2, 0.35), CONSUMERS: (50.1, 0.28)},
    LIKES_AND_DISLIKES_MODEL: {
        WELL_KNOWN: (61.3, 0.18),
        LESSER_KNOWN: (57.6, 0.46),
        CONSUMERS: (59.6, 0.30),
    },
}
LIFT_PAIRS = ((LIKES_MODEL, POPULARITY), (LIKES_AND_DISLIKES_MODEL, LIKES_MODEL))


def report_records(reports: Sequence[StakeholderReport]) -> List[dict]:
    """One record per model and stakeholder."""
    records = []
    for report in reports:
        for stakeholder in STAKEHOLDERS:
            counts = [run.count(stakeholder) for run in report.runs]
            records.append(
                {
                    "model": report.model,
                    "stakeholder": stakeholder,
                    "mean": report.mean(stakeholder),
                    "std": report.std(stakeholder),
                    "values": [run.precision(stakeholder) for run in report.runs],
                    "recommended": [total for total, _ in counts],
                    "liked": [liked for _, liked in counts],
                    "seeds": [run.seed for run in report.runs],
                    "chosen_lambda": [run.chosen_lambda for run in report.runs],
                    "cold_pairs": [run.cold_pairs for run in report.runs],
                }
            )
    return records


def write_report(reports: Sequence[StakeholderReport], path, meta: dict):
    document = {
        "meta": dict(meta, dispersion=DISPERSION),
        "records": report_records(reports),
    }
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(document, indent=2, sort_keys=True))
        f.write("\n")
    _log.info("wrote %s", path)


def _cell(mean: Optional[float], std: Optional[float]) -> str:
    if mean is None:
        return UNDEFINED
    return f"{100 * mean:.1f} ± {100 * (std or 0.0):.2f}"


def format_table(reports: Sequence[StakeholderReport]) -> str:
    rows = []
    for report in reports:
        row = {"Model": report.model}
        for stakeholder in STAKEHOLDERS:
            row[COLUMN_TITLES[stakeholder]] = _cell(
                report.mean(stakeholder), report.std(stakeholder)
            )
        rows.append(row)
    table = pd.DataFrame(rows).to_string(index=False)
    return f"{table}\n(± is the {DISPERSION})\n"


def compare_with_published(reports: Sequence[StakeholderReport]) -> pd.DataFrame:
    """Measured vs published precision in percent, delta = measured - published."""
    rows = []
    for report in reports:
        published = PUBLISHED.get(report.model)
        if published is None:
            continue
        for stakeholder in STAKEHOLDERS:
            measured = report.mean(stakeholder)
            reference = published[stakeholder]
            measured_pct = None if measured is None else round(100 * measured, 2)
            reference_pct = None if reference is None else reference[0]
            delta = (
                None
                if measured_pct is None or reference_pct is None
                else round(measured_pct - reference_pct, 2)
            )
            rows.append(
                {
                    "model": report.model,
                    "stakeholder": stakeholder,
                    "measured": measured_pct,
                    "published": reference_pct,
                    "delta": delta,
                }
            )
    return pd.DataFrame(rows, columns=["model", "stakeholder", "measured", "published", "delta"])


def _published_mean(model: str, stakeholder: str) -> Optional[float]:
    cell = PUBLISHED[model][stakeholder]
    return None if cell is None else cell[0]


def compare_lifts(reports: Sequence[StakeholderReport]) -> pd.DataFrame:
    by_model = {report.model: report for report in reports}
    rows = []
    for model, reference in LIFT_PAIRS:
        if model not in by_model or reference not in by_model:
            continue
        measured = relative_lift(by_model[model], by_model[reference])
        for stakeholder in STAKEHOLDERS:
            ours = _published_mean(model, stakeholder)
            theirs = _published_mean(reference, stakeholder)
            published = None if ours is None or theirs is None else (ours - theirs) / theirs
            rows.append(
                {
                    "model": model,
                    "versus": reference,
                    "stakeholder": stakeholder,
                    "measured_lift": _percent(measured[stakeholder]),
                    "published_lift": _percent(published),
                }
            )
    return pd.DataFrame(
        rows, columns=["model", "versus", "stakeholder", "measured_lift", "published_lift"]
    )


def _percent(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(100 * value, 1)


def _dashed(frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.astype(object)
    return frame.where(frame.notna(), UNDEFINED)


def format_comparison(reports: Sequence[StakeholderReport]) -> str:
    comparison = _dashed(compare_with_published(reports))
    lifts = _dashed(compare_lifts(reports))
    return (
        "Precision (%) measured vs published\n"
        f"{comparison.to_string(index=False)}\n\n"
        "Relative lift (%)\n"
        f"{lifts.to_string(index=False)}\n"
    )
