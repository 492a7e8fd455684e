import logging

from contextlib import contextmanager
from pathlib import Path

from .config import config_path, experiment_config, resolve_settings
from .dataset import dataset_summary, load_csv, synth_generate, write_csv

_log = logging.getLogger(__name__)

commands = {}


def command(name, help):
    """Register a controller method as a subcommand."""

    def register(method):
        method.command_name = name
        method.command_help = help
        return method

    return register


def scan(controller_class):
    for attribute in vars(controller_class).values():
        name = getattr(attribute, "command_name", None)
        if name is not None:
            commands[name] = (controller_class, attribute)


class BaseController(object):
    """Provide a basic Controller class to extend."""

    def __init__(self, args):
        """Make relevant services available."""
        self.args = args
        self.current_stage = "configure"
        self.settings = resolve_settings(
            config_path(args.get("config")),
            {k: v for k, v in args.items() if "." in k},
        )
        self.config = experiment_config(self.settings)

    @contextmanager
    def stage(self, name):
        self.current_stage = name
        _log.debug("entering stage %s", name)
        yield

    def load_dataset(self):
        config = self.config
        with self.stage("load"):
            if config.data_path:
                return load_csv(config.data_path, feedback=config.feedback)
            synth = config.synth
            _log.info(
                "no data path configured, generating %d x %d synthetic dataset",
                synth.num_users,
                synth.num_songs,
            )
            return synth_generate(
                synth.num_users,
                synth.num_songs,
                synth.d_true,
                synth.density,
                synth.noise,
                synth.seed,
            )

    def output_dir(self):
        out = Path(self.config.out)
        out.mkdir(parents=True, exist_ok=True)
        return out


def _quantiles(values):
    return " / ".join(f"{v:.2f}" for v in values)


class DatasetController(BaseController):
    """Dataset inspection and synthetic data generation."""

    @command("inspect", help="print dataset statistics")
    def inspect(self):
        dataset = self.load_dataset()
        summary = dataset_summary(dataset)
        print(f"users:              {summary.num_users}")
        print(f"songs:              {summary.num_songs}")
        print(f"interactions:       {summary.num_interactions}")
        print(f"like rate:          {summary.like_rate:.3f}")
        print(f"superlike rate:     {summary.superlike_rate:.3f}")
        print(f"personalized rate:  {summary.personalized_rate:.3f}")
        print(f"popularity mean:    {summary.popularity_mean:.2f}")
        print(f"well-known songs:   {summary.well_known_songs}")
        print(f"lesser-known songs: {summary.lesser_known_songs}")
        print(f"user like rates (min/q1/median/q3/max): {_quantiles(summary.user_like_rates)}")
        print(f"song like rates (min/q1/median/q3/max): {_quantiles(summary.song_like_rates)}")
        return summary

    @command("synth", help="generate a synthetic dataset in the export schema")
    def synth(self):
        synth = self.config.synth
        with self.stage("generate"):
            dataset = synth_generate(
                synth.num_users,
                synth.num_songs,
                synth.d_true,
                synth.density,
                synth.noise,
                synth.seed,
            )
        with self.stage("write"):
            path = self.output_dir() / f"synthetic-{synth.seed}.csv"
            write_csv(dataset, path)
        print(f"wrote {len(dataset)} interactions to {path}")
        return path
