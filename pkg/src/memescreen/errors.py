"""Typed errors raised across memescreen.

Every error carries a stable ``code`` string so that the CLI, the HTTP
service and batch failure records can report it without string matching.
"""

from __future__ import annotations


class MemeScreenError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def to_dict(self) -> dict:
        out = {"code": self.code, "message": str(self)}
        out.update({k: str(v) for k, v in self.details.items()})
        return out


# input validation


class UndecodableImage(MemeScreenError):
    code = "UNDECODABLE_IMAGE"


class EmptyId(MemeScreenError):
    code = "EMPTY_ID"


class DuplicateId(MemeScreenError):
    code = "DUPLICATE_ID"


# backends


class BackendError(MemeScreenError):
    code = "BACKEND_ERROR"


class BackendUnavailable(BackendError):
    code = "BACKEND_UNAVAILABLE"


class BackendTimeout(BackendError):
    code = "BACKEND_TIMEOUT"


class UnsupportedSource(BackendError):
    code = "UNSUPPORTED_SOURCE"


class PromptTooLong(BackendError):
    code = "PROMPT_TOO_LONG"


class InvalidCandidates(MemeScreenError):
    """Candidate list is empty or contains duplicates."""

    code = "INVALID_CANDIDATES"


# classification


class PlaceholderMissing(MemeScreenError):
    code = "PLACEHOLDER_MISSING"


class MissingCandidate(MemeScreenError):
    code = "MISSING_CANDIDATE"


class NonpositiveTemperature(MemeScreenError):
    code = "NONPOSITIVE_TEMPERATURE"


class StageFailure(MemeScreenError):
    """A pipeline stage failed; ``stage`` names it and ``cause`` is the original error."""

    code = "STAGE_FAILURE"

    def __init__(self, stage, cause: BaseException):
        self.stage = stage
        self.cause = cause
        cause_code = getattr(cause, "code", type(cause).__name__)
        super().__init__(f"{stage.value} stage failed: {cause_code}: {cause}")

    @property
    def cause_code(self) -> str:
        return getattr(self.cause, "code", type(self.cause).__name__)

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "stage": self.stage.value,
            "cause": self.cause_code,
            "message": str(self.cause),
        }


# evaluation


class DegenerateLabels(MemeScreenError):
    code = "DEGENERATE_LABELS"


class EmptySet(MemeScreenError):
    code = "EMPTY_SET"


class LabelMismatch(MemeScreenError):
    """Predictions and labels do not pair up one-to-one by id."""

    code = "LABEL_MISMATCH"


# dataset generation


class ProviderFailure(MemeScreenError):
    code = "PROVIDER_FAILURE"


class NoFontForScript(MemeScreenError):
    code = "NO_FONT_FOR_SCRIPT"


class TextTooLong(MemeScreenError):
    code = "TEXT_TOO_LONG"


class EmptyCorpus(MemeScreenError):
    code = "EMPTY_CORPUS"

    def __init__(self, language):
        self.language = language
        super().__init__(f"corpus for {language.value} has no usable lines")


class MalformedVerdict(MemeScreenError):
    code = "MALFORMED_VERDICT"


# configuration / CLI


class ConfigError(MemeScreenError):
    code = "CONFIG_ERROR"


class UsageError(MemeScreenError):
    code = "USAGE_ERROR"
