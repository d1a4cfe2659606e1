"""Large-deviation rate functions and simulation for component sizes of sparse random graphs."""

__version__ = "0.1.0"
