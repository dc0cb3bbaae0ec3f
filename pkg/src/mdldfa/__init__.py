"""Two-part MDL model selection for DFAs over fixed-length positive samples."""

__version__ = "1.0.0"

from .codelen import DomainError
from .dfa import CapacityError, DataSample, Dfa

__all__ = ["__version__", "CapacityError", "DataSample", "Dfa", "DomainError"]
