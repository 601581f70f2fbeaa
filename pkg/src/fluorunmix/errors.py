"""Exception hierarchy shared by all fluorunmix modules.

The CLI maps these onto its stable exit codes (see ``fluorunmix.cli``):
validation and file-format failures exit 3, OS-level I/O problems exit 2,
wavelength grid mismatches exit 4, and benchmark check failures exit 1.
"""

__all__ = [
    "FluorUnmixError",
    "ValidationError",
    "DataFormatError",
    "GridMismatchError",
    "LibraryConditionError",
    "BenchCheckError",
]


class FluorUnmixError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FluorUnmixError, ValueError):
    """A value or configuration violates a documented precondition."""


class DataFormatError(FluorUnmixError, ValueError):
    """A file exists but its contents do not match the expected format."""


class GridMismatchError(FluorUnmixError, ValueError):
    """Two objects live on different wavelength grids and no resampling was requested."""


class LibraryConditionError(FluorUnmixError, ValueError):
    """The endmember Gram matrix is singular or numerically unusable.

    Raised by operations that need (B^T B)^{-1}; the fix is to repair or
    regenerate the endmember library (drop or reshape a redundant column).
    """


class BenchCheckError(FluorUnmixError, RuntimeError):
    """A benchmark ordering check failed in ``--check`` mode."""
