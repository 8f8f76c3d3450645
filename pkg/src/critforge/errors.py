class CritforgeError(Exception):
    """Base class for library errors."""


class NonIsolatedError(CritforgeError):
    """An operation needs a finite Milnor number and none was certified."""


class NotRelativelyMorse(CritforgeError, ValueError):
    """The fiber Hessian block is singular."""


class DegenerateForm(CritforgeError, ValueError):
    """A quadratic form expected to be non-degenerate is not."""


class ResourceLimit(CritforgeError):
    """A dense or jet matrix would exceed the configured size cap."""


class ContractViolation(CritforgeError):
    """An internal self-check failed; this is a bug, not a user error."""
