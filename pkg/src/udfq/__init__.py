"""Universal deformation formulae for three-dimensional solvable Lie groups."""

__version__ = "0.1.0"
