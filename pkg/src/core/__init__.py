"""Core utilities and shared functionality for Proxlab."""

__version__ = "0.1.0"
