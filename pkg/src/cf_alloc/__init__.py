"""Robust scheduling and power allocation for cell-free massive MIMO downlink."""

from .config import ExperimentSpec, NetworkConfig
from .errors import CfAllocError

__all__ = ["NetworkConfig", "ExperimentSpec", "CfAllocError"]
__version__ = "0.1.0"
