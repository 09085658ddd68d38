"""Numerical workbench for PT-symmetric, non-Hermitian Hamiltonians."""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    NoSymmetryError,
    NonDiagonalizableError,
    NumericalFailure,
    PTBenchError,
    ValidationError,
)
from .linalg_core import SpectralClass, char_poly, eigen_system, poly_roots, rank_nullspace  # noqa: E402
from .pt_analysis import (  # noqa: E402
    build_biorthogonal,
    construct_V,
    find_antilinear_symmetry,
    hermitianize,
    norm_invariance_check,
    secular_reality,
)
