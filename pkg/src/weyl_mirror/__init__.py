"""Exact verification of duality and mirror statements for ADE Frobenius structures."""

__version__ = "0.1.0"
