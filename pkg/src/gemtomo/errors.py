"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
NumericsError -> 3, FormatError and I/O errors -> 4.
"""


class ValidationError(ValueError):
    """Invalid parameters, grids, or configuration."""


class NumericsError(RuntimeError):
    """A numerical procedure failed (non-convergence, degenerate objective)."""


class FormatError(ValueError):
    """Malformed binary container, CSV, or JSON payload."""
