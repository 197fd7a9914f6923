"""Typed feature structures, a reference parser and an abstract parsing machine."""

__version__ = "0.1.0"
