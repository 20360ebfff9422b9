"""Finite type I_N factors in standard form: modular objects and the inverse problem."""

__version__ = "0.1.0"
