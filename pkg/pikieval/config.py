import logging
import os

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from .errors import ConfigurationError
from .dataset import FEEDBACK_FILTERS
from .evaluation.report import LIKES_AND_DISLIKES_MODEL, LIKES_MODEL
from .training.schema import LIKES, LIKES_AND_DISLIKES, WeightSchema
from .training.trainer import DEFAULT_LAMBDA_GRID, TrainConfig

_log = logging.getLogger(__name__)

CONFIG_ENV = "PIKICONFIG"

DEFAULT_MODELS = [
    {"name": LIKES_MODEL, "alpha": LIKES.alpha, "beta": LIKES.beta, "gamma": LIKES.gamma},
    {
        "name": LIKES_AND_DISLIKES_MODEL,
        "alpha": LIKES_AND_DISLIKES.alpha,
        "beta": LIKES_AND_DISLIKES.beta,
        "gamma": LIKES_AND_DISLIKES.gamma,
    },
]

DEFAULTS: Dict[str, Any] = {
    "data.path": None,
    "data.feedback": "all",
    "synth.num_users": 50,
    "synth.num_songs": 50,
    "synth.d_true": 2,
    "synth.density": 0.5,
    "synth.noise": 0.0,
    "synth.seed": 0,
    "split.ratio": 0.8,
    "experiment.runs": 5,
    "experiment.seed": 0,
    "experiment.jobs": 1,
    "experiment.out": "out",
    "train.learning_rate": 0.01,
    "train.batch_size": 512,
    "train.d": 20,
    "train.lambda_grid": list(DEFAULT_LAMBDA_GRID),
    "train.max_epochs": 100,
    "train.patience": 5,
    "models": DEFAULT_MODELS,
    "db.url": None,
    "db.echo": False,
}


@dataclass(frozen=True)
class ModelSpec:
    name: str
    schema: WeightSchema


@dataclass(frozen=True)
class SynthConfig:
    num_users: int = 50
    num_songs: int = 50
    d_true: int = 2
    density: float = 0.5
    noise: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: Optional[str] = None
    feedback: str = "all"
    synth: SynthConfig = field(default_factory=SynthConfig)
    split_ratio: float = 0.8
    runs: int = 5
    base_seed: int = 0
    jobs: int = 1
    out: str = "out"
    train: TrainConfig = field(default_factory=TrainConfig)
    models: Tuple[ModelSpec, ...] = ()
    db_url: Optional[str] = None
    db_echo: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigurationError(f"runs must be >= 1: {self.runs}")
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be >= 1: {self.jobs}")
        if self.base_seed < 0:
            raise ConfigurationError(f"seed must be non-negative: {self.base_seed}")
        if not 0 < self.split_ratio < 1:
            raise ConfigurationError(f"split ratio outside (0, 1): {self.split_ratio}")
        if self.feedback not in FEEDBACK_FILTERS:
            raise ConfigurationError(f"unknown feedback filter: {self.feedback}")
        names = [spec.name for spec in self.models]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate model names: {names}")

    def run_seed(self, run_index: int) -> int:
        return self.base_seed + run_index


def flatten(document: Mapping, prefix: str = "") -> Dict[str, Any]:
    """Collapse nested mappings into dotted keys; lists stay leaves."""
    flat: Dict[str, Any] = {}
    for key, value in document.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def load_settings(path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = yaml.load(f.read(), Loader=yaml.SafeLoader)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"{path}: {e}") from e
    if document is None:
        return {}
    if not isinstance(document, Mapping):
        raise ConfigurationError(f"{path}: expected a mapping at the top level")
    settings = flatten(document)
    for key in settings:
        if key not in DEFAULTS:
            raise ConfigurationError(f"{path}: unknown setting {key}")
    return settings


def config_path(explicit: Optional[str]) -> Optional[str]:
    if explicit:
        return explicit
    return os.environ.get(CONFIG_ENV)


def resolve_settings(path: Optional[str], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Defaults, then the config file, then command-line flags."""
    settings = dict(DEFAULTS)
    if path:
        _log.debug("reading settings from %s", path)
        settings.update(load_settings(path))
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return settings


def model_specs(entries) -> Tuple[ModelSpec, ...]:
    specs = []
    for entry in entries:
        try:
            schema = WeightSchema(
                float(entry["alpha"]), float(entry["beta"]), float(entry["gamma"])
            )
            specs.append(ModelSpec(str(entry["name"]), schema))
        except (KeyError, TypeError) as e:
            raise ConfigurationError(f"malformed model entry {entry!r}") from e
        except ValueError as e:
            raise ConfigurationError(f"model {entry.get('name')!r}: {e}") from e
    return tuple(specs)


def experiment_config(settings: Mapping[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            data_path=settings["data.path"],
            feedback=str(settings["data.feedback"]),
            synth=SynthConfig(
                num_users=int(settings["synth.num_users"]),
                num_songs=int(settings["synth.num_songs"]),
                d_true=int(settings["synth.d_true"]),
                density=float(settings["synth.density"]),
                noise=float(settings["synth.noise"]),
                seed=int(settings["synth.seed"]),
            ),
            split_ratio=float(settings["split.ratio"]),
            runs=int(settings["experiment.runs"]),
            base_seed=int(settings["experiment.seed"]),
            jobs=int(settings["experiment.jobs"]),
            out=str(settings["experiment.out"]),
            train=TrainConfig(
                learning_rate=float(settings["train.learning_rate"]),
                batch_size=int(settings["train.batch_size"]),
                d=int(settings["train.d"]),
                lambda_grid=tuple(settings["train.lambda_grid"]),
                max_epochs=int(settings["train.max_epochs"]),
                patience=int(settings["train.patience"]),
                seed=int(settings["experiment.seed"]),
            ),
            models=model_specs(settings["models"]),
            db_url=settings["db.url"],
            db_echo=bool(settings["db.echo"]),
        )
    except (TypeError, ValueError) as e:
        raise ConfigurationError(str(e)) from e
