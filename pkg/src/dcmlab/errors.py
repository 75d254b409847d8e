"""Exception types shared across the package."""


class DcmLabError(Exception):
    """Base class for all package errors."""


class InvalidLaw(DcmLabError):
    """A degree law violates a structural requirement (e.g. unequal marginal means)."""


class DegenerateLaw(DcmLabError):
    """A law has no usable mass for the requested operation (e.g. nu = 0)."""


class RetriesExhausted(DcmLabError):
    """The i.i.d. resampling step failed too many times in a row."""


class EmptyGraph(DcmLabError):
    """An operation requires at least one edge."""


class NodeOutOfRange(DcmLabError):
    """A node id is outside 0..n-1."""


class NonMonotoneInput(DcmLabError):
    """A cumulative input was expected to be nondecreasing."""


class PopulationOverflow(DcmLabError):
    """A branching-process generation exceeded the configured cap."""


class UndefinedTilt(DcmLabError):
    """The extinction-conditioned law is not defined for these inputs."""


class NoSurvivingMass(DcmLabError):
    """Both martingale-limit pools are extinct; the conditional law is empty."""


class EmptyEmpirical(DcmLabError):
    """An empirical histogram has no finite-distance mass."""


class ExhaustedStubs(DcmLabError):
    """The graph exploration ran out of unpaired stubs."""


class OutOfValidityWindow(DcmLabError):
    """A diagnostic was requested outside its validity window."""


class ParameterOutOfRange(DcmLabError):
    """A parameter combination violates a documented admissibility rule."""
