from typing import Dict, Optional, Sequence

from .metrics import STAKEHOLDERS, StakeholderReport


def aggregate_runs(reports: Sequence[StakeholderReport]) -> StakeholderReport:
    """Pool the runs of several reports on the same model."""
    if not reports:
        raise ValueError("need at least one report to aggregate")
    runs = tuple(run for report in reports for run in report.runs)
    return StakeholderReport(model=reports[0].model, runs=runs)


def relative_lift(
    report: StakeholderReport, reference: StakeholderReport
) -> Dict[str, Optional[float]]:
    """(mean - reference mean) / reference mean per stakeholder."""
    lifts = {}
    for stakeholder in STAKEHOLDERS:
        ours, theirs = report.mean(stakeholder), reference.mean(stakeholder)
        lifts[stakeholder] = None if ours is None or not theirs else (ours - theirs) / theirs
    return lifts
