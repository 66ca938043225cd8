"""Graph languages of 0L graph grammars as automatic structures."""

__version__ = "0.1.0"
