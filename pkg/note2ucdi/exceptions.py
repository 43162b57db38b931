class Note2UCDIException(Exception):
    """Base class for every error raised by note2ucdi"""

    pass


class ImageFormatError(Note2UCDIException):
    """Raised when an image has the wrong shape or channel count for an operation"""

    pass


class ImageReadError(Note2UCDIException):
    """Raised when an image file is missing or cannot be decoded"""

    pass


class EnhanceError(Note2UCDIException):
    """Raised when an enhancement stage receives invalid parameters"""

    pass


class AlignmentError(Note2UCDIException):
    """Raised when a damaged note cannot be registered onto its reference"""

    pass


class DamageError(Note2UCDIException):
    """Raised when a damage metric cannot be computed"""

    pass


class UcdiError(Note2UCDIException):
    """Raised when UCDI inputs are inadmissible"""

    pass


class ConfigError(Note2UCDIException):
    """Raised when the run configuration is invalid"""

    pass


class StageError(Note2UCDIException):
    """Raised by the analysis pipeline, naming the stage that failed"""

    def __init__(self, stage: str, cause: Exception) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
