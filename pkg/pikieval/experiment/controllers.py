import dataclasses
import logging

from concurrent.futures import ProcessPoolExecutor
from typing import List, NamedTuple

from tqdm import tqdm

from ..config import DEFAULT_MODELS, ExperimentConfig, model_specs
from ..controllers import BaseController, command
from ..errors import ConfigurationError
from ..evaluation.aggregate import aggregate_runs
from ..evaluation.baselines import (
    ANTI_POPULARITY,
    POPULARITY,
    anti_popularity_baseline,
    popularity_baseline,
)
from ..evaluation.metrics import StakeholderReport, evaluate_model
from ..evaluation.report import format_comparison, format_table, write_report
from ..factors import save_model
from ..models import init_db
from ..repository import ResultRepository
from ..splitting import SplitBundle, stratified_split
from ..training.schema import WeightSchema
from ..training.trainer import TrainConfig, TrainingResult, config_dict, train, write_training_log
from ..utility import lambda_label, progress_enabled, slugify

_log = logging.getLogger(__name__)


class TrainJob(NamedTuple):
    run_index: int
    model_name: str
    schema: WeightSchema
    config: TrainConfig
    split: SplitBundle


class JobResult(NamedTuple):
    run_index: int
    seed: int
    model_name: str
    report: StakeholderReport
    training: TrainingResult


def train_job(job: TrainJob) -> JobResult:
    """Train and evaluate one model on one split; owns its model exclusively."""
    training = train(job.split, job.schema, job.config)
    report = evaluate_model(
        training.model, job.split, job.model_name, chosen_lambda=training.lam
    )
    return JobResult(job.run_index, job.config.seed, job.model_name, report, training)


def run_jobs(jobs: List[TrainJob], workers: int) -> List[JobResult]:
    progress = dict(total=len(jobs), desc="training", disable=not progress_enabled())
    if workers == 1:
        return [train_job(job) for job in tqdm(jobs, **progress)]
    # map() yields in submission order, so merging stays deterministic
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(tqdm(executor.map(train_job, jobs), **progress))


class ExperimentController(BaseController):
    """Run the train/evaluate protocol over repeated stratified splits."""

    def execute(self, dataset, config: ExperimentConfig, out):
        baselines = {POPULARITY: [], ANTI_POPULARITY: []}
        jobs = []
        for run_index in range(config.runs):
            seed = config.run_seed(run_index)
            with self.stage("split"):
                split = stratified_split(dataset, config.split_ratio, seed)
            with self.stage("evaluate"):
                baselines[POPULARITY].append(
                    popularity_baseline(split.evaluation, split.song_well_known, seed=seed)
                )
                baselines[ANTI_POPULARITY].append(
                    anti_popularity_baseline(split.evaluation, split.song_well_known, seed=seed)
                )
            for spec in config.models:
                train_config = dataclasses.replace(config.train, seed=seed)
                jobs.append(TrainJob(run_index, spec.name, spec.schema, train_config, split))

        with self.stage("train"):
            results = run_jobs(jobs, config.jobs)

        with self.stage("write"):
            (out / "logs").mkdir(exist_ok=True)
            (out / "models").mkdir(exist_ok=True)
            for result in results:
                prefix = f"run{result.run_index}-seed{result.seed}-{slugify(result.model_name)}"
                for fit in result.training.fits:
                    write_training_log(
                        fit.epochs, out / "logs" / f"{prefix}-lambda{lambda_label(fit.lam)}.jsonl"
                    )
                save_model(result.training.model, out / "models" / f"{prefix}.wrmf")

        reports = [aggregate_runs(baselines[POPULARITY]), aggregate_runs(baselines[ANTI_POPULARITY])]
        for spec in config.models:
            reports.append(
                aggregate_runs([r.report for r in results if r.model_name == spec.name])
            )
        return reports

    def meta(self, config: ExperimentConfig):
        train_settings = config_dict(config.train)
        del train_settings["seed"]
        return {
            "data": config.data_path
            if config.data_path
            else dataclasses.asdict(config.synth),
            "feedback": config.feedback,
            "split_ratio": config.split_ratio,
            "runs": config.runs,
            "seeds": [config.run_seed(k) for k in range(config.runs)],
            "train": train_settings,
            "models": [
                dict(name=spec.name, **dataclasses.asdict(spec.schema))
                for spec in config.models
            ],
        }

    def publish(self, name, config: ExperimentConfig, reports, out):
        with self.stage("report"):
            write_report(reports, out / "report.json", self.meta(config))
            table = format_table(reports)
            (out / "table.txt").write_text(table, encoding="utf-8")
            print(table)
        if config.db_url:
            with self.stage("ledger"):
                self.record(name, config, reports)

    def record(self, name, config: ExperimentConfig, reports):
        engine = init_db({"sqlalchemy.url": config.db_url, "sqlalchemy.echo": config.db_echo})
        with engine.begin() as connection:
            repo = ResultRepository(connection)
            experiment_id = repo.create_experiment(name, config.base_seed, config.runs)
            count = repo.add_results(experiment_id, reports)
        _log.info("stored %d result rows as experiment %d", count, experiment_id)
        return experiment_id

    @command("run", help="train and evaluate the configured models")
    def run(self):
        config = self.config
        dataset = self.load_dataset()
        out = self.output_dir()
        reports = self.execute(dataset, config, out)
        self.publish("run", config, reports, out)
        return reports

    @command("reproduce-table1", help="run the canonical comparison and diff it against the published table")
    def reproduce_table1(self):
        if not self.config.data_path:
            raise ConfigurationError("reproduce-table1 needs --data pointing at the Piki export")
        # canonical protocol; only data, seed, jobs, output and ledger come from settings
        config = ExperimentConfig(
            data_path=self.config.data_path,
            feedback="all",
            runs=5,
            base_seed=self.config.base_seed,
            jobs=self.config.jobs,
            out=self.config.out,
            train=TrainConfig(),
            models=model_specs(DEFAULT_MODELS),
            db_url=self.config.db_url,
            db_echo=self.config.db_echo,
        )
        self.config = config
        dataset = self.load_dataset()
        out = self.output_dir()
        reports = self.execute(dataset, config, out)
        self.publish("reproduce-table1", config, reports, out)
        with self.stage("compare"):
            comparison = format_comparison(reports)
            (out / "comparison.txt").write_text(comparison, encoding="utf-8")
            print(comparison)
        return reports
