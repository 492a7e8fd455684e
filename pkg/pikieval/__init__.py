import argparse
import logging

from .controllers import DatasetController, commands, scan
from .errors import PikiError
from .experiment.controllers import ExperimentController

_log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _add_common(parser):
    parser.add_argument("--config", help="YAML settings file (default: $PIKICONFIG)")
    parser.add_argument("--data", dest="data.path", help="Piki CSV export")
    parser.add_argument("--out", dest="experiment.out", help="output directory")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    feedback = parser.add_mutually_exclusive_group()
    feedback.add_argument(
        "--personalized-only",
        dest="data.feedback",
        action="store_const",
        const="personalized",
        help="keep only recommended ratings",
    )
    feedback.add_argument(
        "--random-only",
        dest="data.feedback",
        action="store_const",
        const="random",
        help="keep only randomly served ratings",
    )


def _add_experiment(parser):
    parser.add_argument("--runs", dest="experiment.runs", type=int)
    parser.add_argument("--seed", dest="experiment.seed", type=int, help="base seed")
    parser.add_argument("--jobs", dest="experiment.jobs", type=int, help="parallel training jobs")


def _add_synth(parser):
    parser.add_argument("--users", dest="synth.num_users", type=int)
    parser.add_argument("--songs", dest="synth.num_songs", type=int)
    parser.add_argument("--d-true", dest="synth.d_true", type=int)
    parser.add_argument("--density", dest="synth.density", type=float)
    parser.add_argument("--noise", dest="synth.noise", type=float)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pikieval",
        description="Train and evaluate binary-feedback matrix factorization models",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (controller_class, method) in commands.items():
        sub = subparsers.add_parser(name, help=method.command_help)
        _add_common(sub)
        _add_synth(sub)
        if name == "synth":
            sub.add_argument("--seed", dest="synth.seed", type=int, help="generator seed")
        else:
            _add_experiment(sub)
    return parser


def main(argv=None):
    """Parse arguments, dispatch to the registered controller and return an exit code."""
    scan(DatasetController)
    scan(ExperimentController)

    args = vars(build_parser().parse_args(argv))
    logging.basicConfig(
        level=logging.DEBUG if args["verbose"] else logging.INFO, format=LOG_FORMAT
    )

    name = args["command"]
    controller_class, method = commands[name]
    controller = None
    try:
        controller = controller_class(args)
        method(controller)
    except (PikiError, ValueError, OSError) as e:
        stage = controller.current_stage if controller else "configure"
        _log.error("%s failed during %s: %s", name, stage, e)
        return 1
    return 0
