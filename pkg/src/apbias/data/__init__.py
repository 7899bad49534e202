"""Bundled curve fixtures."""

import os

_HERE = os.path.dirname(os.path.abspath(__file__))

FIXTURES = {
    "allcurves_20000": "allcurves_20000.txt.gz",
    "newform_levels": "newform_levels.txt",
}


def fixture_path(name):
    """Absolute path of a bundled fixture by short name."""
    try:
        return os.path.join(_HERE, FIXTURES[name])
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
