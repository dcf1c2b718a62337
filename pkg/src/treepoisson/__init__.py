"""Poisson kernels, polyharmonic functions and heat semigroups on homogeneous trees."""
from .errors import (
    AmbiguousSignError,
    BranchPointError,
    InSpectrumError,
    ParseError,
    RadiusCapError,
    RadiusExhaustedError,
    RootHasNoParentError,
    TreePoissonError,
    UnknownSuiteError,
)
from .kernels import (
    CoeffMatrix,
    bound_constant,
    coeff_matrix,
    kernel_bound,
    kernel_derivative,
    majorant_constant,
    poisson_kernel,
)
from .measures import BoundaryMeasure, integrate_kernel, nu_o
from .polyharmonic import (
    BallValues,
    OrderDemotionWarning,
    PolyFunction,
    apply_shifted_laplacian,
    apply_stencil,
    evaluate,
    evaluate_ball,
    heat_apply,
    norm,
    orbit,
    right_inverse,
    to_hor_representation,
)
from .spectral import EigenParam, Jet, gamma, in_l2_spectrum, spectral_radius, z_from_lambda, z_jet
from .tree import ROOT, BoundaryRay, HomogeneousTree, Vertex, dist, hor
from .verify import SuiteConfig, SuiteReport, run_suite

__version__ = "0.1.0"
