"""Identification codes and secrecy analysis for classical-quantum channels."""

__version__ = "0.1.0"
