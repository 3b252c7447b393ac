"""Compiler and runtime for an open-universe probabilistic modeling language.

The package parses a small BLOG-subset modeling language, analyzes it, and
either interprets it directly (the reference engine) or emits a specialized
Python inference program for likelihood weighting, parental
Metropolis-Hastings, or Gibbs sampling.
"""

__version__ = "0.1.0"
