"""Exception hierarchy.

The CLI maps ConfigError (and subclasses) to exit code 2 and AccuracyError
to exit code 3.
"""


class AdialabError(Exception):
    """Base class for all adialab errors."""


class ConfigError(AdialabError):
    """Invalid configuration, schema violation, or violated precondition."""


class AccuracyError(AdialabError):
    """A numerical accuracy contract was violated during a run."""


class HermiticityError(ConfigError):
    """Input operator is not Hermitian within tolerance."""


class AmbiguousSelectorError(ConfigError):
    """Projection selector matches more than one eigenvalue group."""


class GapSingularError(ConfigError):
    """Spectral gap too small for the gapped commutator solver."""


class PreconditionError(ConfigError):
    """Operation precondition violated (details in the message)."""


class UndersampledError(ConfigError):
    """Trajectory too sparsely sampled for the requested diagnostic."""


class FitError(ConfigError):
    """Not enough usable rows to fit."""
