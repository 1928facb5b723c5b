"""Circuit cutting under device noise: cut, simulate fragments, recombine."""

__version__ = "0.1.0"
