"""Sparse symmetric solvers and combinatorial support preconditioners."""

__version__ = "0.1.0"
