import pytest

from pikieval.evaluation.aggregate import aggregate_runs, relative_lift
from pikieval.evaluation.metrics import (
    CONSUMERS,
    LESSER_KNOWN,
    WELL_KNOWN,
    RunPrecision,
    StakeholderReport,
)


def _report(name, liked, well_known=0, seed=None):
    run = RunPrecision(
        recommended=10,
        recommended_liked=liked,
        well_known=well_known,
        well_known_liked=min(liked, well_known),
        lesser_known=10 - well_known,
        lesser_known_liked=liked - min(liked, well_known),
        seed=seed,
    )
    return StakeholderReport(name, (run,))


def test_aggregate_pools_runs_in_order():
    report = aggregate_runs([_report("m", 4, seed=0), _report("m", 6, seed=1)])
    assert report.model == "m"
    assert [run.seed for run in report.runs] == [0, 1]
    assert report.consumers == pytest.approx(0.5)
    assert report.std(CONSUMERS) == pytest.approx(0.1414213, rel=1e-5)


def test_aggregate_needs_reports():
    with pytest.raises(ValueError):
        aggregate_runs([])


def test_relative_lift():
    lifts = relative_lift(_report("a", 5, well_known=5), _report("b", 4))
    assert lifts[CONSUMERS] == pytest.approx(0.25)
    # reference has no well-known recommendations
    assert lifts[WELL_KNOWN] is None
    assert lifts[LESSER_KNOWN] == pytest.approx(-1.0)
