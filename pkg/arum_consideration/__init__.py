"""
arum-consideration: executable additive random utility models with
consideration sets.

Exact choice probabilities for finite-support ARUM, ARUM-E and ARUM-CS
models, the transformations between them, identified sets for
consideration probabilities, counterfactual and welfare bounds, and a
scenario runner that writes the results as CSV and JSON.
"""

__version__ = "0.1.0"
