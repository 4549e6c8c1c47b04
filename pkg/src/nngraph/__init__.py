"""Learning nearest-neighbor graphs from noisy distance oracles."""

__version__ = "0.1.0"
