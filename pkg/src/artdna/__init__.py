"""Artificial DNA: self-describing netlists that build and heal distributed embedded applications."""

__version__ = "0.1.0"
