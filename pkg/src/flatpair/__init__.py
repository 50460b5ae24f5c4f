"""Pairings of closed one-forms with quadratic differentials on flat surfaces,
and the Hodge and Teichmuller norms of the resulting Beltrami differentials."""

from .errors import FlatPairError, InputError, NumericalError
from .mesh import Mesh, triangulate
from .surface import FlatSurface, bundled, double_cover, load, loads

__version__ = "0.1.0"

__all__ = ["FlatPairError", "InputError", "NumericalError", "Mesh", "triangulate", "FlatSurface", "bundled",
           "double_cover", "load", "loads"]
