"""Command line for the NXT agent harness."""

from .main import create_parser, main

__all__ = ["create_parser", "main"]
