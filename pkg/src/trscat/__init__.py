"""Transmission resonances of truncated Schrödinger operators."""

__version__ = "0.1.0"
