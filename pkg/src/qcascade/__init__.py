"""Shallow-circuit compilation of quantum control cascades."""

__version__ = "0.1.0"
