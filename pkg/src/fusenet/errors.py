"""Error taxonomy shared across the engine.

Each class maps to one CLI exit category; everything else (programming
errors, shape bugs) surfaces as ShapeError/ValueError and is not caught.
"""


class FuseNetError(Exception):
    """Base class for engine errors."""

    category = "error"


class ConfigError(FuseNetError):
    """Bad or inconsistent run configuration (CLI exit 2)."""

    category = "config-error"


class DataError(FuseNetError):
    """Unreadable or malformed dataset input (CLI exit 3)."""

    category = "data-error"


class TrainingError(FuseNetError):
    """Training precondition failure or mid-run abort (CLI exit 4)."""

    category = "training-error"


class TransportError(FuseNetError):
    """Remote embedding provider unreachable or failing (CLI exit 5)."""

    category = "transport-error"

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class ContractError(FuseNetError):
    """Remote provider responded but violated the wire contract (CLI exit 5)."""

    category = "contract-error"


class ShapeError(ValueError):
    """Tensor dimension mismatch; names both offending shapes."""
