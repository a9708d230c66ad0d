"""Exception hierarchy shared across the package.

Every failure the library raises on purpose derives from :class:`CropFdaError`,
so callers (and the CLI exit-code mapping) can distinguish our errors from
genuine bugs.
"""


class CropFdaError(Exception):
    """Base class for all errors raised by cropfda."""


class ConfigError(CropFdaError, ValueError):
    """Invalid configuration: bad basis spec, mismatched bases, bad options."""


class DomainError(CropFdaError, ValueError):
    """Evaluation point outside the season domain."""


class IntervalError(CropFdaError, ValueError):
    """Invalid integration or scenario window [t0, t1]."""


class StateError(CropFdaError, RuntimeError):
    """Operation applied to an object in the wrong state (e.g. double centering)."""


class AlignmentError(CropFdaError, ValueError):
    """Row/cell counts of panels and score matrices do not line up."""


class SingularityError(CropFdaError, ValueError):
    """Rank-deficient design or smoothing system."""


class ConvergenceError(CropFdaError, RuntimeError):
    """Iterative solver failed to reach its tolerance within the iteration cap."""


class InsufficientDataError(CropFdaError, ValueError):
    """Too few curves/observations for the requested decomposition."""


class DataError(CropFdaError, ValueError):
    """Invalid file contents (CSV panels, sidecar metadata)."""


class FormatError(DataError):
    """Unparseable row or wrong header."""


class RecordError(DataError):
    """A parsed record violates a field constraint (e.g. non-positive area)."""


class IntegrityError(DataError):
    """Gaps, duplicates or missing cells in a panel file."""


class EmptyPanelError(DataError):
    """Balancing left no usable provinces."""


class UnknownNameError(CropFdaError, KeyError):
    """Lookup of an unknown covariate or estimator tag."""


class BootstrapError(CropFdaError, RuntimeError):
    """Too many bootstrap replicas failed."""


class MissingArtifactError(CropFdaError, FileNotFoundError):
    """A required input file or directory does not exist."""
