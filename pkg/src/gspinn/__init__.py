"""Symmetry-guided physics-informed networks for fundamental solutions of linear PDEs."""
from .errors import ConfigError, DomainError, FormatError, GspinnError, NumericError, UsageError

__all__ = ["ConfigError", "DomainError", "FormatError", "GspinnError", "NumericError", "UsageError"]
