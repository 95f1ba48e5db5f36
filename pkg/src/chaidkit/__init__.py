"""Categorical classification toolkit: chi-square feature selection, CHAID trees, rules and evaluation."""

__version__ = "0.1.0"
