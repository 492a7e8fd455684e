import json
import logging
import math
import time

from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..evaluation.metrics import consumer_precision
from ..factors import DEFAULT_DIMENSION, FactorModel, init_model
from ..splitting import FeedbackPartition, SplitBundle, partition_feedback
from .optimizer import AdagradState, adagrad_step
from .sampling import check_sampleable, sample_batch
from .schema import WeightSchema

_log = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = (0.1, 0.01, 0.001, 0.0001)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 512
    d: int = DEFAULT_DIMENSION
    lambda_grid: Tuple[float, ...] = DEFAULT_LAMBDA_GRID
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning rate must be positive: {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch size must be >= 1: {self.batch_size}")
        if self.d < 1:
            raise ConfigurationError(f"dimension must be >= 1: {self.d}")
        if self.max_epochs < 1:
            raise ConfigurationError(f"max epochs must be >= 1: {self.max_epochs}")
        if self.patience < 1:
            raise ConfigurationError(f"patience must be >= 1: {self.patience}")
        if not self.lambda_grid or min(self.lambda_grid) < 0:
            raise ConfigurationError(f"lambda grid must be non-empty and >= 0: {self.lambda_grid}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative: {self.seed}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lam: float
    loss: float
    validation_precision: float
    seed: int
    wall_time: float = field(compare=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "epoch": self.epoch,
                "lambda": self.lam,
                "loss": self.loss,
                "validation_precision": self.validation_precision,
                "seed": self.seed,
                "wall_time": round(self.wall_time, 6),
            }
        )


@dataclass(frozen=True, eq=False)
class LambdaFit:
    lam: float
    precision: float
    best_epoch: int
    epochs: Tuple[EpochRecord, ...]


@dataclass(frozen=True, eq=False)
class TrainingResult:
    model: FactorModel
    lam: float
    validation_precision: float
    fits: Tuple[LambdaFit, ...]

    @property
    def log(self) -> List[EpochRecord]:
        return [record for fit in self.fits for record in fit.epochs]


def _fit_lambda(
    split: SplitBundle,
    partition: FeedbackPartition,
    schema: WeightSchema,
    config: TrainConfig,
    lam: float,
    grid_index: int,
) -> Tuple[LambdaFit, FactorModel]:
    model = init_model(split.num_users, split.num_songs, config.d, seed=config.seed)
    state = AdagradState.for_model(model)
    rng = np.random.default_rng([config.seed, grid_index])
    batches = math.ceil(len(split.train) / config.batch_size)

    best_model, best_precision, best_epoch = model.copy(), -math.inf, 0
    records = []
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        losses = [
            adagrad_step(
                model,
                sample_batch(partition, schema, config.batch_size, rng),
                lam,
                config.learning_rate,
                state,
            )
            / config.batch_size
            for _ in range(batches)
        ]
        precision = consumer_precision(model, split.validation)
        record = EpochRecord(
            epoch=epoch,
            lam=lam,
            loss=float(np.mean(losses)),
            validation_precision=precision,
            seed=config.seed,
            wall_time=time.perf_counter() - started,
        )
        records.append(record)
        _log.debug(
            "lambda %g epoch %d: loss %.6f, validation precision %.4f",
            lam,
            epoch,
            record.loss,
            precision,
        )

        if precision > best_precision:
            best_model, best_precision, best_epoch = model.copy(), precision, epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                _log.debug("lambda %g: early stop after epoch %d", lam, epoch)
                break

    return LambdaFit(lam, best_precision, best_epoch, tuple(records)), best_model


def train(split: SplitBundle, schema: WeightSchema, config: TrainConfig) -> TrainingResult:
    """Fit one model per grid value and keep the best on validation precision.

    Each grid value starts from the same initialisation with fresh Adagrad
    accumulators; within a value, the parameters of the best epoch are kept.
    """
    if len(split.validation) == 0:
        raise ConfigurationError("validation split is empty")
    if len(split.train) == 0:
        raise ConfigurationError("training split is empty")
    partition = partition_feedback(split.train, split.num_users, split.num_songs)
    check_sampleable(partition, schema)

    fits = []
    best: Optional[LambdaFit] = None
    best_model: Optional[FactorModel] = None
    for grid_index, lam in enumerate(config.lambda_grid):
        fit, model = _fit_lambda(split, partition, schema, config, lam, grid_index)
        _log.info(
            "lambda %g: best validation precision %.4f at epoch %d of %d",
            lam,
            fit.precision,
            fit.best_epoch,
            len(fit.epochs),
        )
        fits.append(fit)
        if best is None or fit.precision > best.precision:
            best, best_model = fit, model

    assert best is not None and best_model is not None
    return TrainingResult(best_model, best.lam, best.precision, tuple(fits))


def write_training_log(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.to_json())
            f.write("\n")


def config_dict(config: TrainConfig) -> dict:
    values = asdict(config)
    values["lambda_grid"] = list(config.lambda_grid)
    return values
