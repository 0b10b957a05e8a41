"""Exception types shared across the package.

The CLI maps these onto exit codes: config errors exit 1, numerical
failures exit 2, missing pipeline artifacts exit 3.
"""


class ConfigError(ValueError):
    """A run configuration key is unknown, malformed, or out of range."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical guarantee."""


class ConvergenceError(NumericalError):
    """The eigenvalue iteration failed to converge."""


class ConservationError(NumericalError):
    """Probability conservation drifted beyond the abort threshold."""


class NonFiniteError(NumericalError):
    """A NaN or infinity appeared where a finite value is required."""


class MissingArtifactError(FileNotFoundError):
    """A pipeline input file is absent; the message names the command that produces it."""
