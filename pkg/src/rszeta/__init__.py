"""Exact local Rankin-Selberg zeta integrals over Q_p and an integrality certifier."""

__version__ = "0.1.0"
