"""Bi-unitary connections from SU(2)_k, their alpha-induction and flatness."""

__version__ = "0.1.0"
