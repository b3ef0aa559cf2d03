"""Connections, pseudoinverses and transport over truncated differential graded algebras."""

__version__ = "0.1.0"
