"""Mechanism-style retrosynthesis engine: single-step prediction with
energy-scored decision traces, and best-first multi-step route planning."""

__version__ = "0.1.0"
