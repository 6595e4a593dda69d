"""Exception hierarchy shared across the package.

Every error that crosses a module boundary carries a short machine-readable
``code`` so the HTTP layer and the CLI can report it uniformly.
"""


class CrimescopeError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    @property
    def message(self):
        return str(self)


class IngestError(CrimescopeError):
    code = "ingest_error"


class GeometryError(CrimescopeError):
    code = "invalid_geometry"


class EmptySelectionError(CrimescopeError):
    code = "empty_selection"


class FilterError(CrimescopeError):
    code = "invalid_filter"


class ModelError(CrimescopeError):
    """Raised for invalid factorization / comparison configurations."""

    code = "invalid_model_config"


class SessionError(CrimescopeError):
    code = "unknown_session"
