"""Bundled run configurations."""

from importlib import resources

NAMES = ("paper_sine.cfg", "paper_circle.cfg", "paper_circle_literal.cfg", "openloop_circle.cfg")


def path(name):
    """Filesystem path of a bundled preset."""
    return str(resources.files(__name__) / name)
