"""Hierarchical goal/subgoal/step script toolkit."""

__version__ = "0.1.0"
