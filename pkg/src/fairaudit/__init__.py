"""Group-fairness auditing and certification for tabular classifiers."""

__version__ = "0.1.0"
