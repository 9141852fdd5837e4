"""Exception types shared across the pipeline."""


class SyzygyError(Exception):
    """Base class for all errors raised by this package."""


class IntegrityError(SyzygyError):
    """Computed data is internally inconsistent (bad rank, wrong window, corrupted input)."""


class FormatError(SyzygyError):
    """A matrix or table file does not follow its declared format."""


class ResourceError(SyzygyError):
    """A computation would exceed its memory budget.

    ``estimate`` carries the working-set estimate in bytes so a scheduler can
    pick the next memory tier.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class UsageError(SyzygyError):
    """Invalid arguments or mismatched inputs supplied by the caller."""
