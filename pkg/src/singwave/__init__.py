"""Spectral analysis and time evolution of the wave equation with the
singular damping 2*alpha/x on the unit interval."""

__version__ = "0.1.0"
