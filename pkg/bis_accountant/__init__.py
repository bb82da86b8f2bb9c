"""
BIS Accountant
Near-exact Monte Carlo privacy accounting for Balanced Iteration Subsampling
"""

__version__ = "1.0.0"
