"""contacthvi - static elastic contact with nonmonotone, displacement-coupled friction."""

__version__ = "0.1.0"

__all__ = ["__version__"]
