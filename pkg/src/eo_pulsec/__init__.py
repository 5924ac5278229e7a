"""Compile, verify, schedule and simulate two-qubit pulse sequences for exchange-only spin qubits."""

__version__ = "0.1.0"
