"""Exception types shared across the package."""


class HyplabError(Exception):
    """Base class for package errors."""


class StructureError(HyplabError):
    """A computed convolution coefficient is negative beyond tolerance.

    Signals that the input coefficients do not define a hypergroup.
    """

    def __init__(self, message, n=None, m=None, t=None, value=None):
        super().__init__(message)
        self.n, self.m, self.t, self.value = n, m, t, value


class QuadratureError(HyplabError):
    """Quadrature failed to converge within the node budget."""


class LpInfeasibleError(HyplabError):
    """The Reiter linear program has no feasible point."""


class ConfigError(HyplabError):
    """Invalid run configuration (bad family name, parameter domain, grid)."""
