"""Rotated Petz recovery fidelities and conditional mutual information on three backends."""

__version__ = "0.1.0"
