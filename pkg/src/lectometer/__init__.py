"""Dialect/language identification and cross-variety similarity estimation
from frame-level speech-embedding matrices."""

__version__ = "0.1.0"
