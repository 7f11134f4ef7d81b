"""Exception types shared across the package."""


class TutorKitError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(TutorKitError):
    """An item parameter violates its domain (e.g. non-positive discrimination)."""


class EmptyInputError(TutorKitError):
    """An operation that needs at least one record received none."""


class UndefinedAUCError(TutorKitError):
    """AUC requested for outcomes that contain only one class."""


class NotConvergedError(TutorKitError):
    """Calibration stopped at the iteration cap without meeting the tolerance."""


class BankLoadError(TutorKitError):
    """An item bank document failed validation."""


class ConfigurationError(TutorKitError):
    """The bank cannot support the requested form or selection."""


class ExhaustedConceptError(TutorKitError):
    """No eligible tutoring exercise remains for the concept."""


class ValidationError(TutorKitError):
    """A submitted payload is incomplete or malformed."""


class StateError(TutorKitError):
    """The operation needs state that has not been recorded yet."""


class ProtocolError(TutorKitError):
    """An event arrived in a phase that does not accept it."""

    def __init__(self, message: str, expected_phase: str = ""):
        super().__init__(message)
        self.expected_phase = expected_phase


class SummaryParseError(TutorKitError):
    """A tutor summary reply did not contain the three required sections."""

    def __init__(self, message: str, raw_reply: str = ""):
        super().__init__(message)
        self.raw_reply = raw_reply


class ScriptValidationError(TutorKitError):
    """A mock reply script is malformed."""


class ProviderUnavailableError(TutorKitError):
    """The completion provider kept failing after the configured retries."""


class ProviderProtocolError(TutorKitError):
    """The completion provider returned a payload that does not parse."""

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class AuthorizationError(TutorKitError):
    """The request lacks a valid bearer token for the addressed student."""


class NotFoundError(TutorKitError):
    """The addressed resource does not exist."""
