"""Numerical transmutation operators between ``-D^2`` and ``-D^2 + q`` on the half-line."""
from ._backend import NAME as BACKEND
from .eigen import EigenTable, apply_operator, eigen_closed_form, eigen_reference, eigen_solve
from .grids import (GridError, PotentialSpec, SpaceGrid, SpectralGrid, SpectralMeasure,
                    make_cosine_measure, make_shifted_measure, measure_for)
from .kernels import (KernelMatrix, delta_identity_check, goursat_solve, invert_kernel,
                      inversion_kernel_check, spectral_kernel, spectral_kernel_extrapolated)
from .transforms import TransformVector, cross_inverse, forward, inverse, parseval_check
from .transmute import (DiscreteOperator, OperatorPair, apply_B, apply_B_star, apply_Bcal,
                        apply_Bcal_star, build_B, build_Bcal, build_Bcal_sqrt, build_Bcal_star,
                        build_V, factorization_check, intertwining_residual)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "EigenTable", "apply_operator", "eigen_closed_form", "eigen_reference",
    "eigen_solve", "GridError", "PotentialSpec", "SpaceGrid", "SpectralGrid", "SpectralMeasure",
    "make_cosine_measure", "make_shifted_measure", "measure_for", "KernelMatrix",
    "delta_identity_check", "goursat_solve", "invert_kernel", "inversion_kernel_check",
    "spectral_kernel", "spectral_kernel_extrapolated", "TransformVector", "cross_inverse",
    "forward", "inverse", "parseval_check", "DiscreteOperator", "OperatorPair", "apply_B",
    "apply_B_star", "apply_Bcal", "apply_Bcal_star", "build_B", "build_Bcal", "build_Bcal_sqrt",
    "build_Bcal_star", "build_V", "factorization_check", "intertwining_residual",
]
