"""Quantum modular arithmetic circuits with measurement-based uncomputation."""
