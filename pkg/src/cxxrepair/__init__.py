"""Toolkit for building, scoring, and annotating C++ compilation-error repairs."""

from cxxrepair.errors import CxxRepairError

__version__ = "0.1.0"

__all__ = ["CxxRepairError", "__version__"]
