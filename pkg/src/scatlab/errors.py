"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, numeric contract
violations -> 3, resource budgets -> 4.
"""


class ScatlabError(Exception):
    """Base class for all scatlab errors."""


class ConfigError(ScatlabError):
    """Malformed or inconsistent configuration input."""


class UnknownPreset(ConfigError):
    """Requested scenario preset does not exist."""


class NumericContractViolation(ScatlabError):
    """A computation finished but violates a declared numeric contract."""


class ResourceBudgetExceeded(ScatlabError):
    """A stage would exceed its configured memory or size budget."""


class LaunchInsideSupport(ScatlabError):
    """Launch point of an asymptotic ray lies inside the potential support."""


class StepFailure(ScatlabError):
    """Adaptive integrator could not meet its tolerance."""


class CapturedOrbit(ScatlabError):
    """Radial deflection integral has no outer turning point with escape."""


class NeighborhoodTrapped(ScatlabError):
    """A finite-difference stencil point of the scattering map is trapped."""


class MatchFailure(ScatlabError):
    """Radial log-derivative matching is singular at tolerance."""


class DomainError(ScatlabError, ValueError):
    """Argument outside the supported domain of a special function."""


class ResolutionBudgetExceeded(ResourceBudgetExceeded):
    """Integral-equation grid would exceed the configured memory cap."""


class SolveFailure(ScatlabError):
    """Dense linear solve broke down."""


class UnitarityFailure(NumericContractViolation):
    """Assembled scattering matrix misses its unitarity tolerance."""


class EigensolveFailure(ScatlabError):
    """Eigendecomposition failed or produced off-circle eigenvalues."""


class FunctionNotVanishingAtOne(ScatlabError):
    """Test function paired with the phase measure must vanish at z = 1."""


class BadArc(ScatlabError):
    """Arc endpoints outside 0 < phi1 < phi2 < 2*pi."""


class NonConvergent(ScatlabError):
    """Refinement sweep did not stabilise (norm appears infinite)."""


class TrappedPoint(ScatlabError):
    """Classical image of the requested point is undefined (trapped)."""
