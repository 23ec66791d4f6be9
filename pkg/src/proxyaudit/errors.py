"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: DataError -> 1, ConfigError -> 2,
BackendError -> 3.
"""


class ProxyAuditError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ProxyAuditError):
    """Invalid configuration: bad values, missing paths, infeasible setups."""


class DataError(ProxyAuditError):
    """Input data violates a format or content contract."""


class PayloadError(DataError):
    """A targeting-report payload failed schema validation.

    ``field`` names the offending field when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class BackendError(ProxyAuditError):
    """A reach/fetch backend failed in a retryable way (transport, 5xx)."""


class ReplayMissError(BackendError):
    """A replay backend has no recorded value for the requested query."""


class FitError(ProxyAuditError):
    """Numerical fit did not converge; carries the best parameters seen."""

    def __init__(self, message, best_params=None, diagnostics=None):
        super().__init__(message)
        self.best_params = best_params
        self.diagnostics = diagnostics or {}
