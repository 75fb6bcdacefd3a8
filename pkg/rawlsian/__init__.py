"""Rawlsian: minimax sub-population fair adaptation of black-box scores and embeddings."""

__version__ = "0.1.0"
