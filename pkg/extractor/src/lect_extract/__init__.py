"""Audio-to-frame-matrix extraction for the classification pipeline."""

__version__ = "0.1.0"
