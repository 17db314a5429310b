"""Scalable approximate membership built from chained 3D Bloom filters."""
from .errors import CapacityError, ConfigError, ImageError
from .filter3d import Bloom3D, CellCoord, Dim3, coords
from .group import FilterGroup
from .hashing import hash64
from .scale import FilterConfig, ScaleBF, ScaleStats

__all__ = [
    "Bloom3D",
    "CapacityError",
    "CellCoord",
    "ConfigError",
    "Dim3",
    "FilterConfig",
    "FilterGroup",
    "ImageError",
    "ScaleBF",
    "ScaleStats",
    "coords",
    "hash64",
]
__version__ = "0.1.0"
