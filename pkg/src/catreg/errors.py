"""Exception hierarchy shared across the package."""


class CatregError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CatregError):
    """Invalid input: schema violations, unknown names, bad configuration."""


class UnseenCategoryError(ValidationError):
    """A category label was supplied that the model never saw during fitting."""


class NumericalError(CatregError):
    """Numerical failure: rank deficiency, degenerate systems, non-convergence."""
