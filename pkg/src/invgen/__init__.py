"""Candidate-based inductive loop-invariant inference over a small verification language."""

__version__ = "0.1.0"
