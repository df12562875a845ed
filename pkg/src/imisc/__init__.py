"""IMISC sparse arrays: construction, coarray analysis and coarray-MUSIC experiments."""

from .geometry import ArrayGeometry, imisc_geometry, max_ies, misc_geometry
from .coarray import CoarrayProfile, CouplingModel, coupling_leakage, difference_coarray

__all__ = [
    "ArrayGeometry",
    "CoarrayProfile",
    "CouplingModel",
    "coupling_leakage",
    "difference_coarray",
    "imisc_geometry",
    "max_ies",
    "misc_geometry",
]
