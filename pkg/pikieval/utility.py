import re
import sys


def slugify(name):
    """Lower-case, dash-separated form of a model name for file names."""
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def lambda_label(lam):
    return f"{lam:g}"


def progress_enabled():
    return sys.stderr.isatty()
