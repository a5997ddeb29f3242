"""Calibration constants for lower bounds on the critical cavitation load."""

__version__ = "0.1.0"
