"""python -m harmonic_rta delegates to the command-line interface."""

from .cli import entry

entry()
