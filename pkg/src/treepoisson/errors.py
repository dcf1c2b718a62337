"""Exception hierarchy shared by every module."""


class TreePoissonError(Exception):
    """Base class for library errors."""


class RootHasNoParentError(TreePoissonError, ValueError):
    pass


class RadiusCapError(TreePoissonError, ValueError):
    """Requested ball/sphere radius exceeds the configured cap."""


class InSpectrumError(TreePoissonError, ValueError):
    """The eigenvalue lies in the l2 spectrum [-rho, rho] of P."""


class BranchPointError(TreePoissonError, ValueError):
    """The inverse of the eigenvalue map is singular (lambda = +-rho)."""


class RadiusExhaustedError(TreePoissonError, ValueError):
    """A stencil was applied to values on a ball of radius 0."""


class AmbiguousSignError(TreePoissonError, RuntimeError):
    """Neither derivative-ladder sign convention fits the numerics."""


class UnknownSuiteError(TreePoissonError, KeyError):
    pass


class ParseError(TreePoissonError, ValueError):
    """Malformed JSON input; the message carries the offending field path."""
