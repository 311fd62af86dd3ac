"""Hard robust-classification instances and their numerical certificates."""

__version__ = "0.1.0"
