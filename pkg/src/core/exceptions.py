"""Custom exceptions for Proxlab.

Every class carries the command-line exit code it maps to.
"""


class ProxlabError(Exception):
    """Base exception for all Proxlab errors."""

    exit_code = 1


class DimensionError(ProxlabError):
    """Shape mismatches and out-of-range orders."""

    exit_code = 2


class UndefinedGcdError(ProxlabError):
    """gcd of minors requested for a zero matrix."""

    exit_code = 2


class RankDeficiencyError(ProxlabError):
    """Rows expected to be linearly independent are not."""

    exit_code = 2


class InstanceFormatError(ProxlabError):
    """Malformed instance, report or sweep-config files."""

    exit_code = 2


class ParameterError(ProxlabError):
    """Invalid generator, walk or command parameters."""

    exit_code = 2


class ResampleBudgetError(ParameterError):
    """A random generator ran out of attempts."""

    pass


class InfeasibleError(ProxlabError):
    """Empty polyhedron or infeasible integer program."""

    exit_code = 3


class UnboundedError(ProxlabError):
    """Linear program unbounded in the objective direction."""

    exit_code = 3


class NoVertexError(ProxlabError):
    """Polyhedron without vertices (not pointed, or empty)."""

    exit_code = 3


class DegenerateObjectiveError(ProxlabError):
    """Normalizing determinant of an objective is zero."""

    exit_code = 3


class WalkStalledError(ProxlabError):
    """A spindle walk could not make progress."""

    exit_code = 3


class HypothesisError(ProxlabError):
    """A stated hypothesis (decomposition, total unimodularity, lattice) fails."""

    exit_code = 3

    def __init__(self, hypothesis: str, message: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"{hypothesis}: {message}")


class ResourceCapError(ProxlabError):
    """A configured enumeration cap would be exceeded."""

    exit_code = 4


class LiftDefectError(ProxlabError):
    """A dimension-reduction identity failed."""

    exit_code = 1

    def __init__(self, identity: str, message: str = ""):
        self.identity = identity
        super().__init__(f"{identity}: {message}")


class CertificationError(ProxlabError):
    """A lower-bound claim failed."""

    exit_code = 1

    def __init__(self, claim: str, message: str = ""):
        self.claim = claim
        super().__init__(f"{claim}: {message}")


class IntegralityError(ProxlabError):
    """An integral matrix or vector was required."""

    exit_code = 2
