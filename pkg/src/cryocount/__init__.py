"""Counter-based cryogenic co-processor simulator and bandwidth/heat models."""

__version__ = "0.1.0"
