"""Error types shared by the learner, partition and harness."""


class AdaptiveQLError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(AdaptiveQLError, ValueError):
    """An argument is outside its documented domain."""


class ContractViolation(AdaptiveQLError, RuntimeError):
    """A caller broke the call protocol of an object (stale id, non-leaf split, ...)."""
