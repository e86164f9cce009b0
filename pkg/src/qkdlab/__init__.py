"""Parity-information and QKD security analysis toolkit."""

__version__ = "0.1.0"
