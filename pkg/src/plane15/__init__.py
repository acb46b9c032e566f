"""plane15: search for and certify nonexistence of weight-15 codewords
in a projective plane of order ten."""

from .cnf import __version__

__all__ = ["__version__"]
