"""
Free Gibbs Transport - Core Module

Configuration, error types and random streams shared by every package.
"""

from .config import dump_config, load_config
from .errors import FreeGibbsError

__all__ = ["FreeGibbsError", "dump_config", "load_config"]
