"""A kernel for a dependently typed language with symmetric data and codata types."""

from .core import GlobalEnv
from .pipeline import Program, load_program, load_source

__all__ = ["GlobalEnv", "Program", "load_program", "load_source"]
__version__ = "0.1.0"
