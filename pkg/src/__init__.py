"""Dunkl harmonic-oscillator semigroups, square functions and their numerical verification."""

__version__ = "0.1.0"
