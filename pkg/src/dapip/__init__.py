"""dapip: programming-by-example synthesis of string transformation programs."""

__version__ = "0.1.0"

from .failure import FAILURE, Failure

__all__ = ["FAILURE", "Failure", "__version__"]
