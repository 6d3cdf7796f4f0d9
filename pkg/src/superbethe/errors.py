"""Exception hierarchy shared by every module."""


class SuperBetheError(Exception):
    """Base class for all library errors."""


class PoleError(SuperBetheError, ZeroDivisionError):
    """A structure function was evaluated at a pole.

    ``pair`` holds the offending arguments when known.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class BackendMismatch(SuperBetheError, TypeError):
    """Exact and floating scalars were mixed."""


class DimensionMismatch(SuperBetheError, ValueError):
    """Operands live on incompatible spaces or have incompatible sizes."""


class SizeGuard(SuperBetheError, ValueError):
    """A dense computation would exceed the configured dimension cap."""


class TwistedModelError(SuperBetheError, ValueError):
    """Zero modes were requested on a twisted chain."""


class TagMismatch(SuperBetheError, ValueError):
    """An expression was evaluated against a family of the other algebra."""


class NoConvergence(SuperBetheError, RuntimeError):
    """A root-finding attempt did not converge."""


class ConfigError(SuperBetheError, ValueError):
    """A JSON model or suite configuration is invalid."""
