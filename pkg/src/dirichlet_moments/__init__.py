"""Second moments of primitive Dirichlet L-functions at the central point.

Brute-force moments over characters, their closed-form main and secondary
terms, the Mellin kernels behind them, and a harness that compares the two.
"""

__version__ = "0.1.0"

from .exceptions import DomainError, NumericalError, PoleError

__all__ = ["DomainError", "NumericalError", "PoleError", "__version__"]
