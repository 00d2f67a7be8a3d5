"""Exception types shared across the package."""


class MolringError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(MolringError, ValueError):
    """A physical or numerical parameter is out of its allowed range."""


class SingularSeparationError(MolringError, ValueError):
    """Two emitters coincide; the dipole-dipole kernels diverge."""


class StructureError(MolringError, ValueError):
    """An input matrix or geometry lacks required structure (e.g. circulant)."""


class ConfigurationError(MolringError, ValueError):
    """Inconsistent model configuration (layout/dissipator mismatch, bad config file)."""


class StiffnessError(MolringError, RuntimeError):
    """The integrator failed to advance; suggests retuning tolerances or time grid."""


class MultipleSteadyStatesError(MolringError, RuntimeError):
    """The Liouvillian null space is degenerate; no unique steady state exists."""
