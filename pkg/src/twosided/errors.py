class TwoSidedError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(TwoSidedError, ValueError):
    """An item index or vector length does not match the item count k."""


class ConfigurationError(TwoSidedError, ValueError):
    """A market, plan, or experiment is malformed."""


class InstanceTooLarge(TwoSidedError):
    """An exact enumeration would exceed its guard.

    ``hint`` carries a remediation suggestion for the CLI.
    """

    def __init__(self, message: str, hint: str = ""):
        super().__init__(message)
        self.hint = hint


class WrongMechanism(ConfigurationError):
    """The mechanism cannot be run on this market shape."""


class DegenerateSeller(ConfigurationError):
    """A seller accepts a demanded bundle with probability zero."""


class WBBViolation(TwoSidedError):
    """An inner mechanism handed to the SBB wrapper ran a deficit."""

    def __init__(self, total):
        super().__init__(f"inner mechanism is not weakly budget balanced: payments sum to {total}")
        self.total = total
