import datetime

from sqlalchemy.sql import select

from .evaluation.metrics import STAKEHOLDERS
from .models import experiment_table, run_result_table


class ResultRepository:
    def __init__(self, db):
        """Make relevant services available."""
        self.db = db

    def create_experiment(self, name, base_seed, runs):
        insert = experiment_table.insert().values(
            name=name,
            base_seed=base_seed,
            runs=runs,
            created_at=datetime.datetime.now(datetime.timezone.utc),
        )
        (insert_id,) = self.db.execute(insert).inserted_primary_key
        return insert_id

    def add_results(self, experiment_id, reports):
        rows = []
        for report in reports:
            for run_index, run in enumerate(report.runs):
                for stakeholder in STAKEHOLDERS:
                    recommended, liked = run.count(stakeholder)
                    rows.append(
                        {
                            "experiment_id": experiment_id,
                            "run_index": run_index,
                            "seed": run.seed,
                            "model": report.model,
                            "stakeholder": stakeholder,
                            "precision": run.precision(stakeholder),
                            "recommended": recommended,
                            "liked": liked,
                            "chosen_lambda": run.chosen_lambda,
                        }
                    )
        # one multi-row insert per experiment
        if rows:
            self.db.execute(run_result_table.insert(), rows)
        return len(rows)

    def get_experiments(self, name=None):
        s = select(experiment_table).order_by(experiment_table.c.id)
        if name is not None:
            s = s.where(experiment_table.c.name == name)
        return [dict(r._mapping) for r in self.db.execute(s)]

    def get_results(self, experiment_id, model=None):
        s = (
            select(run_result_table)
            .where(run_result_table.c.experiment_id == experiment_id)
            .order_by(run_result_table.c.id)
        )
        if model is not None:
            s = s.where(run_result_table.c.model == model)
        return [dict(r._mapping) for r in self.db.execute(s)]
