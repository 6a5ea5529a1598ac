"""smooshlab: simulation and verification lab for gather-and-spread card shuffling."""

__version__ = "0.1.0"
