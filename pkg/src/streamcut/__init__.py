"""Single-pass streaming sparsifiers, minimum cuts and effective resistances."""

__version__ = "0.1.0"
