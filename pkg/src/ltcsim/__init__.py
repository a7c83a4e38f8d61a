"""Numerical models for long-range tunable couplers between fluxonium qubits."""

__version__ = "0.1.0"
